#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

#include "acre/protocol.hpp"

namespace acre::testing {

inline std::filesystem::path source_dir() { return ACRE_SOURCE_DIR; }
inline std::string protocol_path(const std::string& file) { return (source_dir() / "protocols" / file).string(); }
inline std::string fixture_path(const std::string& file) {
    return (source_dir() / "tests" / "fixtures" / file).string();
}
inline std::string trace_path(const std::string& file) { return (source_dir() / "traces" / file).string(); }

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Resolves a fixture from protocols/, looking imports up in the same
/// directory.
inline std::shared_ptr<const Protocol> load_resolved(const std::string& file) {
    Protocol cancel = parse_protocol_file(protocol_path("cancel.xml"));
    Protocol p = parse_protocol_file(protocol_path(file));
    return std::make_shared<const Protocol>(
        resolve(p, [&](const ProtocolId& id) { return id == cancel.id ? &cancel : nullptr; }));
}

/// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("acre-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    void write(const std::string& name, const std::string& content) const {
        std::ofstream(path_ / name, std::ios::binary) << content;
    }

private:
    std::filesystem::path path_;
};

}  // namespace acre::testing
