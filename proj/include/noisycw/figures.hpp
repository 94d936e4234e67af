#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "noisycw/averaging.hpp"

namespace noisycw {

// Data sets behind the published panels, parameters pinned in one table in
// figures.cpp.  reproduce_figure writes the files for one preset into
// out_dir and returns their paths; quad_order 0 keeps the per-preset
// default, which is sized for a single core.
const std::vector<std::string>& known_figures();

std::vector<std::filesystem::path> reproduce_figure(
    const std::string& name, const std::filesystem::path& out_dir,
    int quad_order = 0, ExecPolicy policy = ExecPolicy::parallel,
    std::vector<std::string>* warnings = nullptr);

}  // namespace noisycw
