#include "noisycw/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace noisycw {

std::string to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::g1_rotating: return "g1_rotating";
        case SeriesKind::g1_lab: return "g1_lab";
        case SeriesKind::g2: return "g2";
        case SeriesKind::g2x_par: return "g2x_par";
        case SeriesKind::g2x_perp: return "g2x_perp";
        case SeriesKind::hom_cross: return "hom_cross";
        case SeriesKind::visibility: return "visibility";
        case SeriesKind::other: return "other";
    }
    return "other";
}

SeriesKind series_kind_from_string(const std::string& s) {
    if (s == "g1_rotating") return SeriesKind::g1_rotating;
    if (s == "g1_lab") return SeriesKind::g1_lab;
    if (s == "g2") return SeriesKind::g2;
    if (s == "g2x_par") return SeriesKind::g2x_par;
    if (s == "g2x_perp") return SeriesKind::g2x_perp;
    if (s == "hom_cross") return SeriesKind::hom_cross;
    if (s == "visibility") return SeriesKind::visibility;
    if (s == "other") return SeriesKind::other;
    throw validation_error("unknown series kind: " + s);
}

void CorrelationSeries::validate() const {
    if (delays.size() != values.size())
        throw validation_error("CorrelationSeries: delays/values size mismatch");
    if (!stderrs.empty() && stderrs.size() != delays.size())
        throw validation_error("CorrelationSeries: stderr size mismatch");
    for (std::size_t i = 1; i < delays.size(); ++i)
        if (delays[i] <= delays[i - 1])
            throw validation_error("CorrelationSeries: delays must be strictly increasing");
}

bool CorrelationSeries::is_uniform(double rel_tol) const {
    if (delays.size() < 3) return true;
    const double d0 = delays[1] - delays[0];
    for (std::size_t i = 2; i < delays.size(); ++i)
        if (std::abs((delays[i] - delays[i - 1]) - d0) > rel_tol * std::max(1.0, std::abs(d0)))
            return false;
    return true;
}

double CorrelationSeries::step() const {
    if (delays.size() < 2) throw validation_error("CorrelationSeries: no step on <2 points");
    return delays[1] - delays[0];
}

double CorrelationSeries::min_delay() const {
    if (delays.empty()) throw validation_error("CorrelationSeries: empty");
    return delays.front();
}

double CorrelationSeries::max_delay() const {
    if (delays.empty()) throw validation_error("CorrelationSeries: empty");
    return delays.back();
}

bool CorrelationSeries::covers(double lo, double hi) const {
    if (delays.empty()) return false;
    const double slack = 1e-9 * std::max(1.0, std::abs(hi - lo));
    return delays.front() <= lo + slack && delays.back() >= hi - slack;
}

cplx CorrelationSeries::value_at(double tau) const {
    if (delays.empty()) throw coverage_error("value_at on empty series");
    const double slack = 1e-9 * std::max(1.0, delays.back() - delays.front());
    if (tau < delays.front() - slack || tau > delays.back() + slack)
        throw coverage_error("value_at: tau outside grid [" +
                             std::to_string(delays.front()) + ", " +
                             std::to_string(delays.back()) + "]: " + std::to_string(tau));
    auto it = std::lower_bound(delays.begin(), delays.end(), tau);
    if (it == delays.end()) return values.back();
    std::size_t i = std::size_t(it - delays.begin());
    if (i == 0) return values.front();
    const double t0 = delays[i - 1], t1 = delays[i];
    const double w = (tau - t0) / (t1 - t0);
    return (1.0 - w) * values[i - 1] + w * values[i];
}

std::vector<double> uniform_grid(double t0, double t1, double step) {
    if (!(step > 0.0) || t1 < t0) throw validation_error("uniform_grid: bad bounds or step");
    const auto n = std::size_t(std::llround((t1 - t0) / step));
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = t0 + double(i) * step;
    return g;
}

CorrelationSeries mirror_symmetric(const CorrelationSeries& half, bool conjugate) {
    half.validate();
    if (half.delays.empty() || std::abs(half.delays.front()) > 1e-12)
        throw validation_error("mirror_symmetric: series must start at tau = 0");
    CorrelationSeries full;
    full.kind = half.kind;
    full.normalized = half.normalized;
    const std::size_t n = half.size();
    full.delays.reserve(2 * n - 1);
    full.values.reserve(2 * n - 1);
    const bool has_err = !half.stderrs.empty();
    if (has_err) full.stderrs.reserve(2 * n - 1);
    for (std::size_t k = n; k-- > 1;) {
        full.delays.push_back(-half.delays[k]);
        full.values.push_back(conjugate ? std::conj(half.values[k]) : half.values[k]);
        if (has_err) full.stderrs.push_back(half.stderrs[k]);
    }
    for (std::size_t k = 0; k < n; ++k) {
        full.delays.push_back(half.delays[k]);
        full.values.push_back(half.values[k]);
        if (has_err) full.stderrs.push_back(half.stderrs[k]);
    }
    return full;
}

void write_series_csv(const std::filesystem::path& file, const CorrelationSeries& s,
                      const std::vector<std::pair<std::string, std::string>>& header) {
    s.validate();
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << "# noisycw series v1\n";
        out << "# kind=" << to_string(s.kind) << "\n";
        out << "# normalized=" << (s.normalized ? 1 : 0) << "\n";
        for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
        const bool has_err = !s.stderrs.empty();
        out << "# columns: delay_ns,re,im" << (has_err ? ",stderr" : "") << "\n";
        char buf[160];
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (has_err)
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.delays[i],
                              s.values[i].real(), s.values[i].imag(), s.stderrs[i]);
            else
                std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.delays[i],
                              s.values[i].real(), s.values[i].imag());
            out << buf;
        }
    }
    std::filesystem::rename(tmp, file);
}

CorrelationSeries read_series_csv(const std::filesystem::path& file,
                                  std::map<std::string, std::string>* header) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    CorrelationSeries s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            const auto start = body.find_first_not_of(' ');
            if (start == std::string::npos) continue;
            body = body.substr(start);
            const auto eq = body.find('=');
            if (eq != std::string::npos) {
                const std::string key = body.substr(0, eq), val = body.substr(eq + 1);
                if (key == "kind") s.kind = series_kind_from_string(val);
                else if (key == "normalized") s.normalized = (val == "1" || val == "true");
                if (header) (*header)[key] = val;
            }
            continue;
        }
        std::istringstream ss(line);
        std::string tok;
        std::vector<double> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
        if (cols.size() < 3)
            throw validation_error("read_series_csv: expected at least 3 columns");
        s.delays.push_back(cols[0]);
        s.values.emplace_back(cols[1], cols[2]);
        if (cols.size() >= 4) s.stderrs.push_back(cols[3]);
    }
    if (!s.stderrs.empty() && s.stderrs.size() != s.delays.size())
        throw validation_error("read_series_csv: ragged stderr column");
    s.validate();
    return s;
}

}  // namespace noisycw
