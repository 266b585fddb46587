#include "acre/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "acre/protocol.hpp"
#include "acre/repository.hpp"
#include "acre/trace.hpp"
#include "xml_dom.hpp"

namespace acre::cli {

namespace fs = std::filesystem;

namespace {

std::vector<fs::path> xml_files_in(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    for (const auto& de : fs::directory_iterator(dir, ec))
        if (de.is_regular_file() && de.path().extension() == ".xml") out.push_back(de.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::string root_element(const std::string& text) {
    try {
        return xml::parse(text)->name;
    } catch (const xml::ParseError&) {
        return {};
    }
}

/// Parsed protocols from the import path, used to satisfy <import> elements
/// of the files being checked. Unreadable or invalid files are ignored here;
/// they are only reported when named directly.
class ImportIndex {
public:
    void add_directory(const fs::path& dir) {
        if (!scanned_.insert(fs::weakly_canonical(dir)).second) return;
        for (const auto& f : xml_files_in(dir)) {
            try {
                add(parse_protocol_file(f.string()));
            } catch (const std::exception&) {
            }
        }
    }
    void add(Protocol p) {
        ProtocolId id = p.id;
        protocols_.insert_or_assign(std::move(id), std::move(p));
    }
    ProtocolLookup lookup() const {
        return [this](const ProtocolId& id) -> const Protocol* {
            auto it = protocols_.find(id);
            return it == protocols_.end() ? nullptr : &it->second;
        };
    }

private:
    std::set<fs::path> scanned_;
    std::map<ProtocolId, Protocol> protocols_;
};

struct Loaded {
    Protocol resolved;
    std::vector<std::string> warnings;
};

enum class LoadStatus { Ok, Invalid, IoError };

/// Reads, parses and resolves one protocol file against `index` plus the
/// file's own directory.
LoadStatus load_one(const std::string& file, ImportIndex& index, Loaded& loaded, std::string& error) {
    std::string text;
    try {
        text = fetch(file);
    } catch (const FetchError& e) {
        error = e.what();
        return LoadStatus::IoError;
    }
    try {
        Protocol p = parse_protocol(text, file);
        index.add_directory(fs::path(file).parent_path().empty() ? fs::path(".") : fs::path(file).parent_path());
        index.add(p);
        loaded.resolved = resolve(p, index.lookup(), &loaded.warnings);
        return LoadStatus::Ok;
    } catch (const std::exception& e) {
        error = e.what();
        return LoadStatus::Invalid;
    }
}

int exit_for(LoadStatus s) {
    switch (s) {
        case LoadStatus::Ok: return kOk;
        case LoadStatus::Invalid: return kInvalid;
        case LoadStatus::IoError: return kIoError;
    }
    return kInvalid;
}

int cmd_validate(const std::vector<std::string>& files, const std::vector<std::string>& import_paths,
                 std::ostream& out, std::ostream& err) {
    ImportIndex index;
    for (const auto& dir : import_paths) index.add_directory(dir);
    // Files checked together may import each other.
    for (const auto& f : files) {
        try {
            index.add(parse_protocol_file(f));
        } catch (const std::exception&) {
        }
    }
    bool invalid = false;
    bool io = false;
    for (const auto& f : files) {
        Loaded loaded;
        std::string error;
        LoadStatus s = load_one(f, index, loaded, error);
        for (const auto& w : loaded.warnings) err << f << ": warning: " << w << "\n";
        if (s == LoadStatus::Ok) {
            out << f << ": OK\n";
        } else {
            out << f << ": error: " << error << "\n";
            invalid = invalid || s == LoadStatus::Invalid;
            io = io || s == LoadStatus::IoError;
        }
    }
    return io ? kIoError : invalid ? kInvalid : kOk;
}

int cmd_describe(const std::string& file, const std::vector<std::string>& import_paths, std::ostream& out,
                 std::ostream& err) {
    ImportIndex index;
    for (const auto& dir : import_paths) index.add_directory(dir);
    Loaded loaded;
    std::string error;
    if (auto s = load_one(file, index, loaded, error); s != LoadStatus::Ok) {
        err << file << ": error: " << error << "\n";
        return exit_for(s);
    }
    for (const auto& w : loaded.warnings) err << file << ": warning: " << w << "\n";
    const Protocol& p = loaded.resolved;

    std::size_t initial = 0, terminal = 0;
    for (const auto& s : p.states) {
        initial += s.initial;
        terminal += s.terminal;
    }
    std::string imports;
    for (const auto& imp : p.imports) imports += (imports.empty() ? "" : ", ") + imp.str();

    out << render_table({
        {"protocol", p.id.str()},
        {"imports", imports.empty() ? "none" : imports},
        {"states", std::to_string(p.states.size()) + " (" + std::to_string(initial) + " initial, " +
                       std::to_string(terminal) + " terminal)"},
        {"transitions", std::to_string(p.transitions.size())},
    });
    out << "\n";

    std::vector<std::vector<std::string>> states{{"STATE", "CLASS", "ORIGIN"}};
    for (const auto& s : p.states)
        states.push_back({s.name, std::string(s.classification()), s.owner == p.id ? "-" : s.owner.str()});
    out << render_table(states) << "\n";

    std::vector<std::vector<std::string>> transitions{
        {"FROM", "TO", "PERFORMATIVE", "SENDER", "RECEIVER", "CONTENT"}};
    for (const auto& t : p.transitions) {
        transitions.push_back({t.from_state, t.to_state, t.performative, render_term(t.sender),
                               render_term(t.receiver), render_term(t.content)});
    }
    out << render_table(transitions);
    return kOk;
}

int cmd_export_dot(const std::string& file, const std::string& output, bool inline_imports,
                   const std::vector<std::string>& import_paths, std::ostream& out, std::ostream& err) {
    ImportIndex index;
    for (const auto& dir : import_paths) index.add_directory(dir);
    Loaded loaded;
    std::string error;
    if (auto s = load_one(file, index, loaded, error); s != LoadStatus::Ok) {
        err << file << ": error: " << error << "\n";
        return exit_for(s);
    }
    for (const auto& w : loaded.warnings) err << file << ": warning: " << w << "\n";
    std::string dot = export_dot(loaded.resolved, {.inline_imports = inline_imports});
    if (output == "-") {
        out << dot;
        return kOk;
    }
    std::ofstream f(output, std::ios::binary | std::ios::trunc);
    if (!(f << dot)) {
        err << output << ": error: cannot write\n";
        return kIoError;
    }
    return kOk;
}

struct ReplayArgs {
    std::vector<std::string> protocols;
    std::string trace;
    bool strict = false;
    std::string ids = "random";
    bool json = false;
    std::string agent;
};

int cmd_replay(const ReplayArgs& args, std::ostream& out, std::ostream& err) {
    Repository repo;
    try {
        std::vector<std::string> protocol_files;
        std::vector<std::string> descriptors;
        auto classify = [&](const std::string& path) {
            std::string root = root_element(fetch(path));
            (root == "repository" ? descriptors : protocol_files).push_back(path);
        };
        for (const auto& loc : args.protocols) {
            if (!is_url(loc) && fs::is_directory(loc)) {
                for (const auto& f : xml_files_in(loc)) classify(f.string());
            } else if (is_url(loc)) {
                protocol_files.push_back(loc);
            } else {
                classify(loc);
            }
        }
        repo.load_all(protocol_files);
        for (const auto& d : descriptors) repo.load_repository(d);
    } catch (const FetchError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInvalid;
    }
    for (const auto& w : repo.take_warnings()) err << "warning: " << w << "\n";

    std::ifstream in(args.trace);
    if (!in) {
        err << args.trace << ": error: cannot read trace\n";
        return kIoError;
    }
    std::vector<TraceRecord> trace;
    try {
        trace = read_trace(in);
    } catch (const TraceError& e) {
        err << args.trace << ": error: " << e.what() << "\n";
        return kInvalid;
    }

    ReplayOptions options;
    options.fixed_ids = args.ids == "fixed";
    if (!args.agent.empty()) options.agent = args.agent;
    ReplayResult result = replay(repo.protocols(), trace, options);

    if (args.json) {
        for (const auto& step : result.steps)
            for (const auto& e : step.events) out << event_json(e, step.index) << "\n";
    } else {
        for (const auto& id : repo.ids()) out << "protocol " << id.str() << "\n";
        for (const auto& step : result.steps) {
            out << "#" << step.index << " " << to_string(step.record.direction) << " "
                << step.record.message.str() << "\n";
            for (const auto& e : step.events) out << "  " << format_event_line(e) << "\n";
        }
        out << "\n" << render_snapshot_table(result.final_snapshot);
    }
    return args.strict && !result.clean ? kInvalid : kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"ACRE conversation reasoning engine: protocol checking and trace replay", "acre"};
    app.require_subcommand(1);

    std::vector<std::string> files;
    std::vector<std::string> import_paths;
    auto* validate = app.add_subcommand("validate", "Parse and resolve protocol files");
    validate->add_option("files", files, "Protocol XML files")->required();
    validate->add_option("--import-path", import_paths, "Directory searched for imported protocols");

    std::string file;
    auto* describe = app.add_subcommand("describe", "Print the states and transitions of a protocol");
    describe->add_option("file", file, "Protocol XML file")->required();
    describe->add_option("--import-path", import_paths, "Directory searched for imported protocols");

    std::string output;
    bool resolve_imports = false;
    auto* dot = app.add_subcommand("export-dot", "Write a Graphviz rendering of a protocol");
    dot->add_option("file", file, "Protocol XML file")->required();
    dot->add_option("-o,--output", output, "Output path, '-' for stdout")->required();
    dot->add_flag("--resolve", resolve_imports, "Inline imported states and transitions");
    dot->add_option("--import-path", import_paths, "Directory searched for imported protocols");

    ReplayArgs rargs;
    auto* rep = app.add_subcommand("replay", "Replay a JSON-lines message trace through a conversation manager");
    rep->add_option("-p,--protocol", rargs.protocols, "Protocol file, repository descriptor or directory")
        ->required();
    rep->add_option("-t,--trace", rargs.trace, "Trace file (JSON lines)")->required();
    rep->add_flag("--strict", rargs.strict, "Exit 1 on any failed, unmatched or ambiguous event");
    rep->add_option("--ids", rargs.ids, "Conversation id generator")
        ->check(CLI::IsMember({"fixed", "random"}));
    rep->add_flag("--json", rargs.json, "Emit the event log as JSON lines");
    rep->add_option("--agent", rargs.agent, "Only replay messages sent or received by this agent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInvalid;
    }

    if (*validate) return cmd_validate(files, import_paths, out, err);
    if (*describe) return cmd_describe(file, import_paths, out, err);
    if (*dot) return cmd_export_dot(file, output, resolve_imports, import_paths, out, err);
    return cmd_replay(rargs, out, err);
}

}  // namespace acre::cli
