#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acre/events.hpp"
#include "acre/protocol.hpp"

namespace acre {

class RepositoryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a location cannot be read (missing file, HTTP failure).
class FetchError : public RepositoryError {
public:
    using RepositoryError::RepositoryError;
};

struct DescriptorEntry {
    ProtocolId id;
    std::string href;
};

struct RepositoryDescriptor {
    std::string base;  // directory path or URL prefix ending in '/'
    std::vector<DescriptorEntry> entries;
};

/// `location` is only used to derive the default base and in diagnostics.
RepositoryDescriptor parse_descriptor(std::string_view xml, std::string_view location);

bool is_url(std::string_view location) noexcept;

/// Reads a file path or an http(s):// URL.
std::string fetch(std::string_view location, std::chrono::seconds timeout = std::chrono::seconds(10));

/// ACRE_CACHE_DIR when set, otherwise "./.acre-cache".
std::filesystem::path default_cache_dir();

/// The protocol manager: a registry of resolved protocols keyed by identity
/// triple, backed by an on-disk cache. Reads may run concurrently; loads are
/// serialized.
class Repository {
public:
    struct Options {
        /// No caching when empty.
        std::optional<std::filesystem::path> cache_dir = default_cache_dir();
        std::chrono::seconds timeout{10};
    };

    Repository();
    explicit Repository(Options options);

    ProtocolId load_protocol(std::string_view location);
    /// Registers an already parsed protocol. `origin` names it in diagnostics.
    ProtocolId add_protocol(const Protocol& parsed, std::string_view origin = "<memory>");
    std::vector<ProtocolId> load_repository(std::string_view descriptor_location);
    /// Loads several locations at once, ordering them by their imports.
    std::vector<ProtocolId> load_all(const std::vector<std::string>& locations);
    std::vector<ProtocolId> recover_cache();

    std::shared_ptr<const Protocol> find(const ProtocolId& id) const;
    std::vector<ProtocolId> ids() const;
    std::vector<std::shared_ptr<const Protocol>> protocols() const;
    std::size_t size() const;

    void subscribe(std::function<void(const EngineEvent&)> listener);
    /// Non-fatal problems seen so far (unmatched regex, skipped cache files).
    std::vector<std::string> take_warnings();

    const std::optional<std::filesystem::path>& cache_dir() const noexcept { return options_.cache_dir; }
    static std::string cache_file_name(const ProtocolId& id);

private:
    struct Entry {
        std::shared_ptr<const Protocol> source;
        std::shared_ptr<const Protocol> resolved;
    };
    struct Pending {
        Protocol parsed;
        std::string origin;
    };

    // Parses, orders and registers a batch; rolls back on any failure.
    std::vector<ProtocolId> register_batch(std::vector<Pending> batch, bool write_cache);
    void write_cache(const Protocol& source);

    Options options_;
    mutable std::shared_mutex mutex_;
    std::map<ProtocolId, Entry> registry_;
    std::vector<std::string> warnings_;
    std::vector<std::function<void(const EngineEvent&)>> listeners_;
};

}  // namespace acre
