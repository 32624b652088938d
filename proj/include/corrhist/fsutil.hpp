#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>

#include "corrhist/errors.hpp"

namespace corrhist {

/// Writes `bytes` to `path`. With a staging directory the file is first
/// written there and then moved into place, so readers never see a partial
/// file.
inline void write_file(const std::filesystem::path& path, std::string_view bytes,
                       const std::optional<std::filesystem::path>& staging = std::nullopt) {
    namespace fs = std::filesystem;
    auto write_to = [&](const fs::path& p) {
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error("cannot write '" + p.string() + "'");
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        f.close();
        if (!f)
            throw Error("write failed for '" + p.string() + "'");
    };
    if (!staging) {
        write_to(path);
        return;
    }
    static std::atomic<unsigned long> counter{0};
    fs::create_directories(*staging);
    fs::path tmp = *staging / (path.filename().string() + ".part" + std::to_string(counter++) + "-" +
                               std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    write_to(tmp);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        // staging on another filesystem
        fs::copy_file(tmp, path, fs::copy_options::overwrite_existing);
        fs::remove(tmp);
    }
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw Error("cannot create output directory '" + dir.string() + "'");
}

}  // namespace corrhist
