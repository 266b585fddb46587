#pragma once

#include <compare>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "acre/term.hpp"

namespace acre {

struct ProtocolId {
    std::string ns;
    std::string name;
    std::string version;

    /// "namespace/name/version"
    std::string str() const;
    /// Inverse of str(); throws std::invalid_argument.
    static ProtocolId parse(std::string_view text);

    friend auto operator<=>(const ProtocolId&, const ProtocolId&) = default;
};

struct State {
    std::string name;
    ProtocolId owner;
    // Derived on resolve; both flags are set only for an isolated state.
    bool initial = false;
    bool terminal = false;

    std::string_view classification() const noexcept;

    friend bool operator==(const State&, const State&) = default;
    friend auto operator<=>(const State&, const State&) = default;
};

struct Transition {
    std::string from_state;
    std::string to_state;
    Term sender = Term::anonymous();
    Term receiver = Term::anonymous();
    std::string performative;
    Term content = Term::anonymous();

    /// from-state written as "/regex/"
    bool from_is_regex() const noexcept;
    std::string label() const;

    friend bool operator==(const Transition&, const Transition&) = default;
    friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// A protocol FSM. Parsed protocols are unresolved; resolve() produces the
/// merged, expanded and classified form and keeps the parsed form in `source`.
struct Protocol {
    ProtocolId id;
    std::vector<State> states;
    std::vector<Transition> transitions;
    std::vector<ProtocolId> imports;
    bool resolved = false;
    std::shared_ptr<const Protocol> source;

    const State* find_state(std::string_view name) const;
    /// Resolved protocols only.
    const std::string& initial_state() const;
    std::vector<std::string> terminal_states() const;
    bool is_terminal(std::string_view state) const;
    std::vector<const Transition*> transitions_from(std::string_view state) const;

    /// Order-insensitive over states, transitions and imports.
    friend bool operator==(const Protocol& a, const Protocol& b);
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Finds the parsed (unresolved) form of an imported protocol, or nullptr.
using ProtocolLookup = std::function<const Protocol*(const ProtocolId&)>;

Protocol parse_protocol(std::string_view xml, std::string_view source_name = "<input>");
Protocol parse_protocol_file(const std::string& path);
std::string write_protocol(const Protocol& p);

Protocol resolve(const Protocol& p, const ProtocolLookup& lookup,
                 std::vector<std::string>* warnings = nullptr);

/// Replaces "/regex/" from-states by one copy per fully matching state name
/// and drops duplicate transitions.
Protocol expand_regex_states(const Protocol& p, std::vector<std::string>* warnings = nullptr);

struct StateClass {
    bool initial = false;
    bool terminal = false;
    friend bool operator==(const StateClass&, const StateClass&) = default;
};

std::map<std::string, StateClass> classify_states(const Protocol& p);

struct DotOptions {
    /// Emit imported states and transitions too; otherwise only the
    /// protocol's own transitions and the states they touch.
    bool inline_imports = true;
};

std::string export_dot(const Protocol& resolved, const DotOptions& options = {});

}  // namespace acre
