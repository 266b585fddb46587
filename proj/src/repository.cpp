#include "acre/repository.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "xml_dom.hpp"

namespace acre {

namespace fs = std::filesystem;

bool is_url(std::string_view location) noexcept {
    return location.starts_with("http://") || location.starts_with("https://");
}

fs::path default_cache_dir() {
    if (const char* env = std::getenv("ACRE_CACHE_DIR"); env != nullptr && *env != '\0') return env;
    return ".acre-cache";
}

std::string fetch(std::string_view location, std::chrono::seconds timeout) {
    if (!is_url(location)) {
        std::ifstream in(std::string(location), std::ios::binary);
        if (!in) throw FetchError("cannot read " + std::string(location));
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }
    auto scheme_end = location.find("://") + 3;
    auto path_start = location.find('/', scheme_end);
    std::string origin(location.substr(0, path_start));
    std::string path = path_start == std::string_view::npos ? "/" : std::string(location.substr(path_start));

    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_follow_location(true);
    auto res = client.Get(path);
    if (!res) throw FetchError("GET " + std::string(location) + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw FetchError("GET " + std::string(location) + " returned HTTP " + std::to_string(res->status));
    return res->body;
}

// ---------------------------------------------------------------------------

RepositoryDescriptor parse_descriptor(std::string_view xml_text, std::string_view location) {
    std::unique_ptr<xml::Element> root;
    try {
        root = xml::parse(xml_text);
    } catch (const xml::ParseError& e) {
        throw RepositoryError(std::string(location) + ":" + std::to_string(e.line()) + ": malformed XML: " + e.what());
    }
    auto fail = [&](long line, const std::string& msg) -> void {
        throw RepositoryError(std::string(location) + ":" + std::to_string(line) + ": " + msg);
    };
    if (root->name != "repository") fail(root->line, "root element must be <repository>");

    RepositoryDescriptor d;
    if (const std::string* base = root->attribute("base")) {
        d.base = *base;
    } else if (is_url(location)) {
        d.base = std::string(location.substr(0, location.rfind('/') + 1));
    } else {
        d.base = fs::path(location).parent_path().string();
    }
    if (is_url(d.base) && !d.base.ends_with('/')) d.base += '/';

    std::set<ProtocolId> seen;
    for (const auto& child : root->children) {
        const auto& el = *child;
        if (el.name != "protocol") fail(el.line, "unexpected element <" + el.name + ">");
        DescriptorEntry e;
        for (const char* key : {"namespace", "name", "version", "href"}) {
            const std::string* v = el.attribute(key);
            if (v == nullptr || v->empty()) fail(el.line, std::string("<protocol> is missing '") + key + "'");
        }
        e.id = {*el.attribute("namespace"), *el.attribute("name"), *el.attribute("version")};
        e.href = *el.attribute("href");
        if (!seen.insert(e.id).second) fail(el.line, "duplicate entry for " + e.id.str());
        d.entries.push_back(std::move(e));
    }
    return d;
}

namespace {

std::string join_location(const std::string& base, const std::string& href) {
    if (is_url(href) || fs::path(href).is_absolute()) return href;
    if (is_url(base)) return base + href;
    if (base.empty()) return href;
    return (fs::path(base) / href).string();
}

}  // namespace

// ---------------------------------------------------------------------------

Repository::Repository() : Repository(Options{}) {}

Repository::Repository(Options options) : options_(std::move(options)) {}

std::string Repository::cache_file_name(const ProtocolId& id) {
    return id.ns + "_" + id.name + "_" + id.version + ".xml";
}

void Repository::subscribe(std::function<void(const EngineEvent&)> listener) {
    std::unique_lock lock(mutex_);
    listeners_.push_back(std::move(listener));
}

std::vector<std::string> Repository::take_warnings() {
    std::unique_lock lock(mutex_);
    return std::exchange(warnings_, {});
}

std::shared_ptr<const Protocol> Repository::find(const ProtocolId& id) const {
    std::shared_lock lock(mutex_);
    auto it = registry_.find(id);
    return it == registry_.end() ? nullptr : it->second.resolved;
}

std::vector<ProtocolId> Repository::ids() const {
    std::shared_lock lock(mutex_);
    std::vector<ProtocolId> out;
    for (const auto& [id, e] : registry_) out.push_back(id);
    return out;
}

std::vector<std::shared_ptr<const Protocol>> Repository::protocols() const {
    std::shared_lock lock(mutex_);
    std::vector<std::shared_ptr<const Protocol>> out;
    for (const auto& [id, e] : registry_) out.push_back(e.resolved);
    return out;
}

std::size_t Repository::size() const {
    std::shared_lock lock(mutex_);
    return registry_.size();
}

void Repository::write_cache(const Protocol& source) {
    if (!options_.cache_dir) return;
    std::error_code ec;
    fs::create_directories(*options_.cache_dir, ec);
    fs::path file = *options_.cache_dir / cache_file_name(source.id);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << write_protocol(source);
    if (!out) warnings_.push_back("could not write cache file " + file.string());
}

std::vector<ProtocolId> Repository::register_batch(std::vector<Pending> batch, bool cache) {
    std::unique_lock lock(mutex_);

    std::map<ProtocolId, Pending> fresh;
    std::vector<ProtocolId> result;
    for (auto& item : batch) {
        const ProtocolId id = item.parsed.id;
        if (std::find(result.begin(), result.end(), id) == result.end()) result.push_back(id);
        if (auto it = registry_.find(id); it != registry_.end()) {
            if (*it->second.source == item.parsed) continue;
            throw RepositoryError(item.origin + ": " + id.str() + " is already registered with different content");
        }
        if (auto it = fresh.find(id); it != fresh.end()) {
            if (it->second.parsed == item.parsed) continue;
            throw RepositoryError(item.origin + ": " + id.str() + " conflicts with " + it->second.origin);
        }
        fresh.emplace(id, std::move(item));
    }

    // Dependency order among the new entries (Kahn, ties broken by id).
    std::vector<ProtocolId> order;
    {
        std::map<ProtocolId, std::size_t> indegree;
        std::map<ProtocolId, std::vector<ProtocolId>> dependents;
        for (const auto& [id, item] : fresh) {
            indegree[id];
            for (const auto& imp : item.parsed.imports) {
                if (!fresh.contains(imp)) continue;
                ++indegree[id];
                dependents[imp].push_back(id);
            }
        }
        std::set<ProtocolId> ready;
        for (const auto& [id, n] : indegree)
            if (n == 0) ready.insert(id);
        while (!ready.empty()) {
            ProtocolId id = *ready.begin();
            ready.erase(ready.begin());
            order.push_back(id);
            for (const auto& dep : dependents[id])
                if (--indegree[dep] == 0) ready.insert(dep);
        }
        if (order.size() != fresh.size()) {
            std::string names;
            for (const auto& [id, n] : indegree)
                if (n > 0) names += " " + id.str();
            throw RepositoryError("import cycle among:" + names);
        }
    }

    ProtocolLookup lookup = [&](const ProtocolId& id) -> const Protocol* {
        if (auto it = fresh.find(id); it != fresh.end()) return &it->second.parsed;
        if (auto it = registry_.find(id); it != registry_.end()) return it->second.source.get();
        return nullptr;
    };

    std::vector<std::pair<ProtocolId, Entry>> staged;
    std::vector<std::string> warnings;
    for (const auto& id : order) {
        const Pending& item = fresh.at(id);
        try {
            Protocol r = resolve(item.parsed, lookup, &warnings);
            Entry e{r.source, std::make_shared<const Protocol>(std::move(r))};
            staged.emplace_back(id, std::move(e));
        } catch (const ProtocolError& err) {
            throw ProtocolError(item.origin + ": " + err.what());
        }
    }

    std::vector<EngineEvent> events;
    for (auto& [id, e] : staged) {
        if (cache) write_cache(*e.source);
        registry_.emplace(id, std::move(e));
        events.push_back({EventKind::ProtocolLoaded, std::nullopt, id, fresh.at(id).origin,
                          std::chrono::system_clock::now()});
    }
    warnings_.insert(warnings_.end(), warnings.begin(), warnings.end());
    auto listeners = listeners_;
    lock.unlock();
    for (const auto& e : events)
        for (const auto& l : listeners) l(e);
    return result;
}

ProtocolId Repository::load_protocol(std::string_view location) {
    std::string text = fetch(location, options_.timeout);
    std::vector<Pending> batch;
    batch.push_back({parse_protocol(text, location), std::string(location)});
    return register_batch(std::move(batch), true).front();
}

ProtocolId Repository::add_protocol(const Protocol& parsed, std::string_view origin) {
    const Protocol& src = parsed.resolved && parsed.source ? *parsed.source : parsed;
    std::vector<Pending> batch;
    batch.push_back({src, std::string(origin)});
    return register_batch(std::move(batch), true).front();
}

std::vector<ProtocolId> Repository::load_all(const std::vector<std::string>& locations) {
    std::vector<Pending> batch;
    for (const auto& loc : locations) batch.push_back({parse_protocol(fetch(loc, options_.timeout), loc), loc});
    return register_batch(std::move(batch), true);
}

std::vector<ProtocolId> Repository::load_repository(std::string_view descriptor_location) {
    RepositoryDescriptor d = parse_descriptor(fetch(descriptor_location, options_.timeout), descriptor_location);
    std::vector<Pending> batch;
    for (const auto& entry : d.entries) {
        std::string loc = join_location(d.base, entry.href);
        Protocol p = parse_protocol(fetch(loc, options_.timeout), loc);
        if (p.id != entry.id)
            throw RepositoryError(std::string(descriptor_location) + ": entry " + entry.id.str() + " points at " +
                                  loc + " which defines " + p.id.str());
        batch.push_back({std::move(p), loc});
    }
    return register_batch(std::move(batch), true);
}

std::vector<ProtocolId> Repository::recover_cache() {
    if (!options_.cache_dir) return {};
    std::error_code ec;
    if (!fs::is_directory(*options_.cache_dir, ec)) return {};

    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(*options_.cache_dir, ec))
        if (de.is_regular_file() && de.path().extension() == ".xml") files.push_back(de.path());
    std::sort(files.begin(), files.end());

    std::vector<std::string> skipped;
    std::vector<Pending> parsed;
    for (const auto& f : files) {
        try {
            parsed.push_back({parse_protocol(fetch(f.string()), f.string()), f.string()});
        } catch (const std::exception& e) {
            skipped.push_back("skipping cache file " + f.string() + ": " + e.what());
        }
    }

    // Register whatever resolves; anything left after a pass without
    // progress has a missing or broken dependency.
    std::vector<ProtocolId> recovered;
    bool progress = true;
    while (!parsed.empty() && progress) {
        progress = false;
        for (auto it = parsed.begin(); it != parsed.end();) {
            bool deps_ready = std::all_of(it->parsed.imports.begin(), it->parsed.imports.end(),
                                          [&](const ProtocolId& imp) { return find(imp) != nullptr; });
            if (!deps_ready) {
                ++it;
                continue;
            }
            try {
                auto ids = register_batch({*it}, false);
                recovered.insert(recovered.end(), ids.begin(), ids.end());
            } catch (const std::exception& e) {
                skipped.push_back("skipping cache file " + it->origin + ": " + e.what());
            }
            it = parsed.erase(it);
            progress = true;
        }
    }
    for (const auto& p : parsed)
        skipped.push_back("skipping cache file " + p.origin + ": unresolved imports");

    std::unique_lock lock(mutex_);
    warnings_.insert(warnings_.end(), skipped.begin(), skipped.end());
    std::sort(recovered.begin(), recovered.end());
    return recovered;
}

}  // namespace acre
