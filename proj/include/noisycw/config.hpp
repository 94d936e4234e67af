#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noisycw/dynamics.hpp"
#include "noisycw/hom.hpp"
#include "noisycw/montecarlo.hpp"

namespace noisycw {

// Delay grid request: either an explicit list or (tau_max, step) from zero.
struct GridSpec {
    double tau_max = 0.0;  // ns
    double step = 0.0;     // ns
    std::vector<double> delays;

    std::vector<double> resolve() const;
};

// One run description, loaded from a JSON file.  Field names carry their
// units; unknown keys are rejected so typos fail loudly.
struct RunConfig {
    TwoLevelSystem system;
    DrivingField field;
    NoiseSpec noise;
    std::optional<HOMSetup> hom;
    EnsembleConfig ensemble;
    GridSpec grid;
    std::vector<SeriesKind> outputs;

    static RunConfig load(const std::filesystem::path& file);
    static RunConfig from_json_text(const std::string& text);

    // single-line JSON echo for the manifest
    std::string echo() const;
};

}  // namespace noisycw
