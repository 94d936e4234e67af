#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "noisycw/common.hpp"

namespace noisycw {

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64_file(const std::filesystem::path& file);

// Sidecar record written next to every batch of output files: enough to
// rerun the exact same job and to spot silently-changed outputs.
struct RunManifest {
    std::string tool_version = kVersion;
    std::string command;
    std::string config_echo;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string regime_summary;
    bool regime_overridden = false;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::uint64_t>> files;  // name, digest

    void add_file(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;
};

}  // namespace noisycw
