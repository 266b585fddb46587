#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace acre {

enum class Mutability { Immutable, Mutable };

/// First-order term: a constant, a variable or a function of sub-terms.
///
/// Terms are immutable values backed by a shared node, so copies are cheap
/// and can be handed between threads freely. The anonymous variable is a
/// variable with an empty name.
class Term {
public:
    enum class Kind { Constant, Variable, Function };

    static Term constant(std::string text);
    static Term variable(std::string name, Mutability mutability = Mutability::Immutable);
    static Term anonymous();
    static Term function(std::string functor, std::vector<Term> args);

    Kind kind() const noexcept;
    bool is_constant() const noexcept { return kind() == Kind::Constant; }
    bool is_variable() const noexcept { return kind() == Kind::Variable; }
    bool is_function() const noexcept { return kind() == Kind::Function; }
    bool is_anonymous() const noexcept;

    /// Constant text, variable name (empty when anonymous) or functor.
    const std::string& text() const noexcept;
    Mutability mutability() const noexcept;
    std::span<const Term> args() const noexcept;
    std::size_t arity() const noexcept { return args().size(); }

    bool is_ground() const noexcept;
    std::size_t depth() const noexcept;

    friend bool operator==(const Term& a, const Term& b) noexcept;
    friend std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept;

private:
    struct Node;
    explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Variable name -> ground value. The anonymous variable never appears.
class BindingSet {
public:
    using Map = std::map<std::string, Term, std::less<>>;

    BindingSet() = default;

    /// Inserts or overwrites. Throws std::invalid_argument for an empty name
    /// or a non-ground value.
    void bind(const std::string& name, const Term& value);
    const Term* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    bool empty() const noexcept { return map_.empty(); }
    std::size_t size() const noexcept { return map_.size(); }

    /// Copies every entry of `other` into this set, overwriting on conflict.
    void merge_overwrite(const BindingSet& other);

    Map::const_iterator begin() const noexcept { return map_.begin(); }
    Map::const_iterator end() const noexcept { return map_.end(); }

    friend bool operator==(const BindingSet&, const BindingSet&) = default;

private:
    Map map_;
};

class TermSyntaxError : public std::runtime_error {
public:
    TermSyntaxError(const std::string& what, std::size_t position);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Thrown when a value that must be ground contains a variable.
class NonGroundValue : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

Term parse_term(std::string_view input);
std::string render_term(const Term& t);
bool is_identifier(std::string_view text) noexcept;

/// Structural match of a pattern against a ground value. Repeated named
/// variables inside the pattern must match equal sub-terms.
bool matches(const Term& pattern, const Term& value);

/// Like matches(), but seeded with and extending `captured`: named variables
/// already present in `captured` must match their recorded value, new ones
/// are recorded. On failure `captured` is left in an unspecified state.
bool match_capture(const Term& pattern, const Term& value, BindingSet& captured);

/// Bindings for every named variable of `pattern` matched against `value`.
/// Throws std::logic_error when the pair does not match.
BindingSet get_bindings(const Term& pattern, const Term& value);

/// Replaces bound immutable variables; mutable, anonymous and unbound
/// variables are kept as they are.
Term apply(const BindingSet& bindings, const Term& pattern);

std::string render_bindings(const BindingSet& bindings);

}  // namespace acre
