#include "noisycw/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace noisycw {

using json = nlohmann::json;

std::vector<double> GridSpec::resolve() const {
    if (!delays.empty()) {
        for (size_t i = 1; i < delays.size(); ++i)
            if (delays[i] <= delays[i - 1])
                throw validation_error("grid.delays_ns must be strictly increasing");
        return delays;
    }
    if (!(tau_max > 0.0) || !(step > 0.0))
        throw validation_error("grid needs tau_max_ns > 0 and step_ns > 0, or delays_ns");
    return uniform_grid(0.0, tau_max, step);
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw validation_error("config field '" + where + "': " + what);
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) fail(where + "." + key, "unknown key");
}

double num(const json& obj, const std::string& where, const std::string& key,
           std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(where + "." + key, "missing");
    }
    if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
    return obj[key].get<double>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw validation_error("config must be a JSON object");
    check_keys(j, "config",
               {"system", "field", "noise", "hom", "ensemble", "grid", "outputs"});

    RunConfig c;
    if (!j.contains("system")) fail("system", "missing");
    {
        const json& s = j["system"];
        check_keys(s, "system", {"t1_ns", "t2_ns"});
        c.system.t1 = num(s, "system", "t1_ns");
        c.system.t2 = num(s, "system", "t2_ns");
    }
    if (!j.contains("field")) fail("field", "missing");
    {
        const json& f = j["field"];
        check_keys(f, "field", {"rabi_mean_rad_ns", "detuning_rad_ns", "lab_freq_rad_ns"});
        c.field.rabi_mean = num(f, "field", "rabi_mean_rad_ns");
        c.field.detuning = num(f, "field", "detuning_rad_ns", 0.0);
        c.field.lab_freq = num(f, "field", "lab_freq_rad_ns", 0.0);
    }
    if (j.contains("noise")) {
        const json& n = j["noise"];
        check_keys(n, "noise",
                   {"tau_c_ns", "var_domega_rad2_ns2", "var_de_rel", "epsilon"});
        c.noise.tau_c = num(n, "noise", "tau_c_ns");
        c.noise.var_domega = num(n, "noise", "var_domega_rad2_ns2", 0.0);
        c.noise.var_de_rel = num(n, "noise", "var_de_rel", 0.0);
        c.noise.epsilon = num(n, "noise", "epsilon", 0.0);
    }
    if (j.contains("hom")) {
        const json& h = j["hom"];
        check_keys(h, "hom",
                   {"r_int", "t_int", "delay_ns", "pol_angle_rad", "gamma_l_inv_ns",
                    "irf_fwhm_ns"});
        HOMSetup hs;
        hs.r_int = num(h, "hom", "r_int", 0.5);
        hs.t_int = num(h, "hom", "t_int", 0.5);
        hs.delay = num(h, "hom", "delay_ns");
        hs.pol_angle = num(h, "hom", "pol_angle_rad", 0.0);
        hs.gamma_l = num(h, "hom", "gamma_l_inv_ns", 0.0);
        hs.irf_fwhm = num(h, "hom", "irf_fwhm_ns", 0.0);
        c.hom = hs;
    }
    if (j.contains("ensemble")) {
        const json& e = j["ensemble"];
        check_keys(e, "ensemble",
                   {"n_traj", "seed", "n_starts", "equil_ns", "spacing_ns", "dt_ns"});
        c.ensemble.n_traj = int(num(e, "ensemble", "n_traj", 400.0));
        c.ensemble.seed = std::uint64_t(num(e, "ensemble", "seed", 1.0));
        c.ensemble.n_starts = int(num(e, "ensemble", "n_starts", 8.0));
        c.ensemble.equil = num(e, "ensemble", "equil_ns", -1.0);
        c.ensemble.spacing = num(e, "ensemble", "spacing_ns", -1.0);
        c.ensemble.dt = num(e, "ensemble", "dt_ns", -1.0);
    }
    if (!j.contains("grid")) fail("grid", "missing");
    {
        const json& g = j["grid"];
        check_keys(g, "grid", {"tau_max_ns", "step_ns", "delays_ns"});
        c.grid.tau_max = num(g, "grid", "tau_max_ns", 0.0);
        c.grid.step = num(g, "grid", "step_ns", 0.0);
        if (g.contains("delays_ns")) {
            if (!g["delays_ns"].is_array()) fail("grid.delays_ns", "expected an array");
            for (const auto& v : g["delays_ns"]) {
                if (!v.is_number()) fail("grid.delays_ns", "expected numbers");
                c.grid.delays.push_back(v.get<double>());
            }
        }
    }
    if (j.contains("outputs")) {
        if (!j["outputs"].is_array()) fail("outputs", "expected an array of kind names");
        for (const auto& v : j["outputs"]) {
            if (!v.is_string()) fail("outputs", "expected strings");
            c.outputs.push_back(series_kind_from_string(v.get<std::string>()));
        }
    }

    c.system.validate();
    c.field.validate();
    c.noise.validate();
    if (c.hom) c.hom->validate();
    c.grid.resolve();
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw validation_error("cannot open config file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::echo() const {
    json j;
    j["system"] = {{"t1_ns", system.t1}, {"t2_ns", system.t2}};
    j["field"] = {{"rabi_mean_rad_ns", field.rabi_mean},
                  {"detuning_rad_ns", field.detuning},
                  {"lab_freq_rad_ns", field.lab_freq}};
    j["noise"] = {{"tau_c_ns", noise.tau_c},
                  {"var_domega_rad2_ns2", noise.var_domega},
                  {"var_de_rel", noise.var_de_rel},
                  {"epsilon", noise.epsilon}};
    if (hom)
        j["hom"] = {{"r_int", hom->r_int},         {"t_int", hom->t_int},
                    {"delay_ns", hom->delay},      {"pol_angle_rad", hom->pol_angle},
                    {"gamma_l_inv_ns", hom->gamma_l}, {"irf_fwhm_ns", hom->irf_fwhm}};
    j["ensemble"] = {{"n_traj", ensemble.n_traj},   {"seed", ensemble.seed},
                     {"n_starts", ensemble.n_starts}, {"equil_ns", ensemble.equil},
                     {"spacing_ns", ensemble.spacing}, {"dt_ns", ensemble.dt}};
    if (!grid.delays.empty())
        j["grid"] = {{"delays_ns", grid.delays}};
    else
        j["grid"] = {{"tau_max_ns", grid.tau_max}, {"step_ns", grid.step}};
    std::vector<std::string> outs;
    for (SeriesKind k : outputs) outs.push_back(to_string(k));
    j["outputs"] = outs;
    return j.dump();
}

}  // namespace noisycw
