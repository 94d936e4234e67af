#include "noisycw/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "noisycw/common.hpp"

namespace noisycw {

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw validation_error("cannot open " + file.string() + " for digest");
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const auto got = static_cast<std::size_t>(in.gcount());
        for (std::size_t i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

void RunManifest::add_file(const std::filesystem::path& file) {
    files.emplace_back(file.filename().string(), fnv1a64_file(file));
}

void RunManifest::save(const std::filesystem::path& file) const {
    std::ostringstream out;
    out << "# noisycw manifest v1\n";
    out << "tool_version=" << tool_version << "\n";
    if (!command.empty()) out << "command=" << command << "\n";
    out << "seed=" << seed << "\n";
    out << "threads=" << threads << "\n";
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", wall_seconds);
    out << "wall_seconds=" << wall << "\n";
    if (!regime_summary.empty()) out << "regime=" << regime_summary << "\n";
    if (regime_overridden) out << "regime_overridden=1\n";
    if (!config_echo.empty()) out << "config=" << config_echo << "\n";
    for (const auto& [name, digest] : files) {
        char hex[24];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(digest));
        out << "file=" << name << " fnv1a64=" << hex << "\n";
    }

    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw validation_error("cannot write " + tmp.string());
        f << out.str();
    }
    std::filesystem::rename(tmp, file);
}

}  // namespace noisycw
