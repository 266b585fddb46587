#include "acre/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "xml_dom.hpp"

namespace acre {

std::string ProtocolId::str() const { return ns + "/" + name + "/" + version; }

ProtocolId ProtocolId::parse(std::string_view text) {
    auto a = text.find('/');
    auto b = a == std::string_view::npos ? a : text.find('/', a + 1);
    if (b == std::string_view::npos || text.find('/', b + 1) != std::string_view::npos)
        throw std::invalid_argument("protocol id must be namespace/name/version: '" + std::string(text) + "'");
    ProtocolId id{std::string(text.substr(0, a)), std::string(text.substr(a + 1, b - a - 1)),
                  std::string(text.substr(b + 1))};
    if (id.ns.empty() || id.name.empty() || id.version.empty())
        throw std::invalid_argument("protocol id has an empty component: '" + std::string(text) + "'");
    return id;
}

std::string_view State::classification() const noexcept {
    if (initial && terminal) return "initial+terminal";
    if (initial) return "initial";
    if (terminal) return "terminal";
    return "intermediate";
}

bool Transition::from_is_regex() const noexcept {
    return from_state.size() >= 2 && from_state.front() == '/' && from_state.back() == '/';
}

std::string Transition::label() const {
    return from_state + " -[" + performative + " " + render_term(content) + "]-> " + to_state;
}

const State* Protocol::find_state(std::string_view name) const {
    for (const auto& s : states)
        if (s.name == name) return &s;
    return nullptr;
}

const std::string& Protocol::initial_state() const {
    for (const auto& s : states)
        if (s.initial) return s.name;
    throw std::logic_error("protocol " + id.str() + " is not resolved");
}

std::vector<std::string> Protocol::terminal_states() const {
    std::vector<std::string> out;
    for (const auto& s : states)
        if (s.terminal) out.push_back(s.name);
    return out;
}

bool Protocol::is_terminal(std::string_view state) const {
    const State* s = find_state(state);
    return s != nullptr && s->terminal;
}

std::vector<const Transition*> Protocol::transitions_from(std::string_view state) const {
    std::vector<const Transition*> out;
    for (const auto& t : transitions)
        if (t.from_state == state) out.push_back(&t);
    return out;
}

namespace {

template <class T>
std::vector<T> sorted(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

bool operator==(const Protocol& a, const Protocol& b) {
    return a.id == b.id && sorted(a.states) == sorted(b.states) &&
           sorted(a.transitions) == sorted(b.transitions) && sorted(a.imports) == sorted(b.imports);
}

// ---------------------------------------------------------------------------
// XML reading

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

class Reader {
public:
    explicit Reader(std::string_view source) : source_(source) {}

    [[noreturn]] void fail(long line, const std::string& msg) const {
        throw ProtocolError(source_ + ":" + std::to_string(line) + ": " + msg);
    }

    void check_attributes(const xml::Element& el, std::initializer_list<std::string_view> allowed) const {
        for (const auto& [k, v] : el.attributes) {
            if (k.find('|') != std::string::npos) continue;
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
                fail(el.line, "unexpected attribute '" + k + "' on <" + el.name + ">");
        }
    }

    std::string required(const xml::Element& el, std::string_view key) const {
        const std::string* v = el.attribute(key);
        if (v == nullptr || trim(*v).empty())
            fail(el.line, "<" + el.name + "> is missing mandatory attribute '" + std::string(key) + "'");
        return trim(*v);
    }

    Term term_attr(const xml::Element& el, std::string_view key) const {
        const std::string* v = el.attribute(key);
        if (v == nullptr) return Term::anonymous();
        try {
            return parse_term(*v);
        } catch (const TermSyntaxError& e) {
            fail(el.line, "attribute '" + std::string(key) + "': " + e.what());
        }
    }

    Protocol read(const xml::Element& root) const {
        if (root.name != "protocol") fail(root.line, "root element must be <protocol>, found <" + root.name + ">");
        check_attributes(root, {});
        Protocol p;
        std::optional<std::string> ns, name, version;
        const xml::Element* states = nullptr;
        const xml::Element* transitions = nullptr;

        auto single_text = [&](const xml::Element& el, std::optional<std::string>& slot) {
            if (slot) fail(el.line, "duplicate <" + el.name + ">");
            if (!el.children.empty()) fail(el.line, "<" + el.name + "> must contain text only");
            std::string v = trim(el.text);
            if (v.empty()) fail(el.line, "<" + el.name + "> is empty");
            if (v.find('/') != std::string::npos) fail(el.line, "<" + el.name + "> may not contain '/'");
            slot = v;
        };

        for (const auto& child : root.children) {
            const auto& el = *child;
            if (el.name == "namespace") {
                single_text(el, ns);
            } else if (el.name == "name") {
                single_text(el, name);
            } else if (el.name == "version") {
                single_text(el, version);
            } else if (el.name == "import") {
                check_attributes(el, {"namespace", "name", "version"});
                p.imports.push_back({required(el, "namespace"), required(el, "name"), required(el, "version")});
            } else if (el.name == "states") {
                if (states) fail(el.line, "duplicate <states>");
                states = &el;
            } else if (el.name == "transitions") {
                if (transitions) fail(el.line, "duplicate <transitions>");
                transitions = &el;
            } else {
                fail(el.line, "unexpected element <" + el.name + ">");
            }
        }
        if (!ns) fail(root.line, "missing <namespace>");
        if (!name) fail(root.line, "missing <name>");
        if (!version) fail(root.line, "missing <version>");
        p.id = {*ns, *name, *version};

        if (states) {
            for (const auto& child : states->children) {
                const auto& el = *child;
                if (el.name != "state") fail(el.line, "unexpected element <" + el.name + "> in <states>");
                check_attributes(el, {"name"});
                std::string sname = required(el, "name");
                if (sname.front() == '/') fail(el.line, "state name may not start with '/'");
                if (p.find_state(sname)) fail(el.line, "duplicate state '" + sname + "'");
                p.states.push_back({sname, p.id});
            }
        }
        if (transitions) {
            for (const auto& child : transitions->children) {
                const auto& el = *child;
                if (el.name != "transition")
                    fail(el.line, "unexpected element <" + el.name + "> in <transitions>");
                p.transitions.push_back(read_transition(el));
            }
        }
        return p;
    }

    Transition read_transition(const xml::Element& el) const {
        check_attributes(el, {"performative", "from-state", "to-state", "sender", "receiver", "content"});
        Transition t;
        std::string perf = required(el, "performative");
        if (perf.front() == '?')
            fail(el.line, "performative '" + perf + "': variables are not permitted in the performative field");
        if (!is_identifier(perf)) fail(el.line, "performative '" + perf + "' is not a plain constant");
        t.performative = lower(perf);
        t.from_state = required(el, "from-state");
        t.to_state = required(el, "to-state");
        if (t.to_state.front() == '/')
            fail(el.line, "to-state '" + t.to_state + "' may not contain a regular expression");
        if (t.from_is_regex()) {
            try {
                std::regex re(t.from_state.substr(1, t.from_state.size() - 2));
            } catch (const std::regex_error& e) {
                fail(el.line, "from-state '" + t.from_state + "': invalid regular expression (" + e.what() + ")");
            }
        } else if (t.from_state.front() == '/') {
            fail(el.line, "from-state '" + t.from_state + "': unterminated regular expression");
        }
        t.sender = term_attr(el, "sender");
        t.receiver = term_attr(el, "receiver");
        t.content = term_attr(el, "content");
        return t;
    }

private:
    std::string source_;
};

}  // namespace

Protocol parse_protocol(std::string_view xml_text, std::string_view source_name) {
    std::unique_ptr<xml::Element> root;
    try {
        root = xml::parse(xml_text);
    } catch (const xml::ParseError& e) {
        throw ProtocolError(std::string(source_name) + ":" + std::to_string(e.line()) + ": malformed XML: " + e.what());
    }
    return Reader(source_name).read(*root);
}

Protocol parse_protocol_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_protocol(buf.str(), path);
}

// ---------------------------------------------------------------------------
// XML writing

std::string write_protocol(const Protocol& p) {
    if (p.resolved && p.source) return write_protocol(*p.source);
    std::ostringstream out;
    out << "<?xml version=\"1.0\"?>\n";
    out << "<protocol xmlns=\"http://acre.lill.is\">\n";
    out << "   <namespace>" << xml::escape(p.id.ns) << "</namespace>\n";
    out << "   <name>" << xml::escape(p.id.name) << "</name>\n";
    out << "   <version>" << xml::escape(p.id.version) << "</version>\n";
    for (const auto& imp : p.imports) {
        out << "   <import namespace=\"" << xml::escape(imp.ns) << "\" name=\"" << xml::escape(imp.name)
            << "\" version=\"" << xml::escape(imp.version) << "\"/>\n";
    }
    out << "   <states>\n";
    for (const auto& s : p.states) out << "      <state name=\"" << xml::escape(s.name) << "\"/>\n";
    out << "   </states>\n";
    out << "   <transitions>\n";
    for (const auto& t : p.transitions) {
        out << "      <transition performative=\"" << xml::escape(t.performative) << "\" from-state=\""
            << xml::escape(t.from_state) << "\" to-state=\"" << xml::escape(t.to_state) << "\"";
        auto opt = [&](const char* key, const Term& v) {
            if (!v.is_anonymous()) out << " " << key << "=\"" << xml::escape(render_term(v)) << "\"";
        };
        opt("sender", t.sender);
        opt("receiver", t.receiver);
        opt("content", t.content);
        out << "/>\n";
    }
    out << "   </transitions>\n";
    out << "</protocol>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Resolution

Protocol expand_regex_states(const Protocol& p, std::vector<std::string>* warnings) {
    Protocol out = p;
    out.transitions.clear();
    std::set<Transition> seen;
    auto keep = [&](Transition t) {
        if (seen.insert(t).second) out.transitions.push_back(std::move(t));
    };
    for (const auto& t : p.transitions) {
        if (!t.from_is_regex()) {
            keep(t);
            continue;
        }
        std::regex re;
        try {
            re = std::regex(t.from_state.substr(1, t.from_state.size() - 2));
        } catch (const std::regex_error& e) {
            throw ProtocolError(p.id.str() + ": invalid regular expression " + t.from_state + ": " + e.what());
        }
        std::size_t copies = 0;
        for (const auto& s : p.states) {
            if (!std::regex_match(s.name, re)) continue;
            Transition copy = t;
            copy.from_state = s.name;
            keep(std::move(copy));
            ++copies;
        }
        if (copies == 0 && warnings)
            warnings->push_back(p.id.str() + ": from-state " + t.from_state + " matches no state");
    }
    return out;
}

std::map<std::string, StateClass> classify_states(const Protocol& p) {
    std::set<std::string_view> has_in, has_out;
    for (const auto& t : p.transitions) {
        has_in.insert(t.to_state);
        has_out.insert(t.from_state);
    }
    std::map<std::string, StateClass> out;
    for (const auto& s : p.states) out[s.name] = {!has_in.contains(s.name), !has_out.contains(s.name)};
    return out;
}

namespace {

void collect_closure(const Protocol& p, const ProtocolLookup& lookup, std::vector<const Protocol*>& order,
                     std::vector<ProtocolId>& path) {
    for (const auto& imp : p.imports) {
        if (std::find(path.begin(), path.end(), imp) != path.end()) {
            std::string chain;
            for (const auto& id : path) chain += id.str() + " -> ";
            throw ProtocolError("import cycle: " + chain + imp.str());
        }
        if (std::any_of(order.begin(), order.end(), [&](const Protocol* q) { return q->id == imp; })) continue;
        const Protocol* dep = lookup ? lookup(imp) : nullptr;
        if (dep == nullptr) throw ProtocolError(p.id.str() + ": unresolved import " + imp.str());
        const Protocol& src = dep->resolved && dep->source ? *dep->source : *dep;
        order.push_back(&src);
        path.push_back(imp);
        collect_closure(src, lookup, order, path);
        path.pop_back();
    }
}

}  // namespace

Protocol resolve(const Protocol& input, const ProtocolLookup& lookup, std::vector<std::string>* warnings) {
    const Protocol& p = input.resolved && input.source ? *input.source : input;
    std::vector<const Protocol*> closure{&p};
    std::vector<ProtocolId> path{p.id};
    collect_closure(p, lookup, closure, path);

    Protocol merged;
    merged.id = p.id;
    merged.imports = p.imports;
    for (const Protocol* part : closure) {
        for (const auto& s : part->states) {
            if (const State* prior = merged.find_state(s.name)) {
                if (prior->owner == s.owner) continue;
                throw ProtocolError(p.id.str() + ": state '" + s.name + "' is declared by both " +
                                    prior->owner.str() + " and " + s.owner.str());
            }
            merged.states.push_back({s.name, s.owner});
        }
        merged.transitions.insert(merged.transitions.end(), part->transitions.begin(), part->transitions.end());
    }
    if (merged.states.empty()) throw ProtocolError(p.id.str() + ": protocol declares no states");

    for (const auto& t : merged.transitions) {
        if (!t.from_is_regex() && !merged.find_state(t.from_state))
            throw ProtocolError(p.id.str() + ": transition " + t.label() + " starts at unknown state '" +
                                t.from_state + "'");
        if (!merged.find_state(t.to_state))
            throw ProtocolError(p.id.str() + ": transition " + t.label() + " ends at unknown state '" +
                                t.to_state + "'");
    }

    merged = expand_regex_states(merged, warnings);

    auto classes = classify_states(merged);
    std::vector<std::string> initials;
    for (auto& s : merged.states) {
        const auto& c = classes.at(s.name);
        s.initial = c.initial;
        s.terminal = c.terminal;
        if (s.initial) initials.push_back(s.name);
    }
    if (initials.empty())
        throw ProtocolError(p.id.str() + ": no initial state (every state has an incoming transition)");
    if (initials.size() > 1) {
        std::string names;
        for (const auto& n : initials) names += (names.empty() ? "" : ", ") + n;
        throw ProtocolError(p.id.str() + ": multiple initial states: " + names);
    }

    merged.resolved = true;
    merged.source = std::make_shared<const Protocol>(p);
    return merged;
}

// ---------------------------------------------------------------------------
// DOT export

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string export_dot(const Protocol& p, const DotOptions& options) {
    if (!p.resolved) throw std::logic_error("export_dot needs a resolved protocol");

    std::vector<Transition> edges = p.transitions;
    std::vector<const State*> nodes;
    if (options.inline_imports || !p.source) {
        for (const auto& s : p.states) nodes.push_back(&s);
    } else {
        Protocol own = *p.source;
        own.states = p.states;
        edges = expand_regex_states(own).transitions;
        std::set<std::string_view> touched;
        for (const auto& t : edges) {
            touched.insert(t.from_state);
            touched.insert(t.to_state);
        }
        for (const auto& s : p.states)
            if (s.owner == p.id || touched.contains(s.name)) nodes.push_back(&s);
    }

    std::ostringstream out;
    out << "digraph " << dot_quote(p.id.str()) << " {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=circle];\n";
    for (const State* s : nodes) {
        std::vector<std::string> attrs;
        if (s->terminal) attrs.push_back("shape=doublecircle");
        if (s->initial) attrs.push_back("style=dashed");
        if (s->owner != p.id) attrs.push_back("color=gray40, tooltip=" + dot_quote(s->owner.str()));
        out << "  " << dot_quote(s->name);
        if (!attrs.empty()) {
            out << " [";
            for (std::size_t i = 0; i < attrs.size(); ++i) out << (i ? ", " : "") << attrs[i];
            out << "]";
        }
        out << ";\n";
    }
    for (const auto& t : edges) {
        out << "  " << dot_quote(t.from_state) << " -> " << dot_quote(t.to_state)
            << " [label=" << dot_quote(t.performative + ": " + render_term(t.content)) << "];\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace acre
