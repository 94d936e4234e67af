#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "noisycw/common.hpp"

namespace noisycw {

enum class SeriesKind { g1_rotating, g1_lab, g2, g2x_par, g2x_perp, hom_cross, visibility, other };

std::string to_string(SeriesKind kind);
SeriesKind series_kind_from_string(const std::string& s);

struct CorrelationSeries {
    std::vector<double> delays;   // ns, strictly increasing
    std::vector<cplx> values;
    std::vector<double> stderrs;  // empty, or one entry per delay
    SeriesKind kind = SeriesKind::other;
    bool normalized = true;

    std::size_t size() const { return delays.size(); }
    void validate() const;
    bool is_uniform(double rel_tol = 1e-9) const;
    double step() const;

    double min_delay() const;
    double max_delay() const;
    bool covers(double lo, double hi) const;
    bool covers(double tau) const { return covers(tau, tau); }

    // Linear interpolation; throws coverage_error outside the grid.
    cplx value_at(double tau) const;
};

std::vector<double> uniform_grid(double t0, double t1, double step);

// Extends a tau >= 0 series onto a symmetric grid.  First-order coherences
// obey g(-tau) = conj(g(tau)); intensity correlations are even.
CorrelationSeries mirror_symmetric(const CorrelationSeries& half, bool conjugate);

// Delimiter-separated output with a commented key=value header block.
// Values are printed with enough digits for 1e-12 round-trips, and files are
// written via a temp + rename so readers never see partial output.
void write_series_csv(const std::filesystem::path& file, const CorrelationSeries& s,
                      const std::vector<std::pair<std::string, std::string>>& header);

CorrelationSeries read_series_csv(const std::filesystem::path& file,
                                  std::map<std::string, std::string>* header = nullptr);

}  // namespace noisycw
