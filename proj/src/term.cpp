#include "acre/term.hpp"

#include <algorithm>
#include <cctype>

namespace acre {

struct Term::Node {
    Kind kind;
    std::string text;
    Mutability mutability = Mutability::Immutable;
    std::vector<Term> args;
    bool ground = true;
    std::size_t depth = 1;
};

namespace {

bool is_identifier_char(char c) noexcept {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

}  // namespace

bool is_identifier(std::string_view text) noexcept {
    return !text.empty() && std::all_of(text.begin(), text.end(), is_identifier_char);
}

Term Term::constant(std::string text) {
    if (text.empty()) throw std::invalid_argument("constant text must be non-empty");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Constant;
    node->text = std::move(text);
    return Term(std::move(node));
}

Term Term::variable(std::string name, Mutability mutability) {
    if (!is_identifier(name))
        throw std::invalid_argument("invalid variable name '" + name + "'");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Variable;
    node->text = std::move(name);
    node->mutability = mutability;
    node->ground = false;
    return Term(std::move(node));
}

Term Term::anonymous() {
    static const Term anon = [] {
        auto node = std::make_shared<Node>();
        node->kind = Kind::Variable;
        node->ground = false;
        return Term(std::move(node));
    }();
    return anon;
}

Term Term::function(std::string functor, std::vector<Term> args) {
    if (!is_identifier(functor))
        throw std::invalid_argument("invalid functor '" + functor + "'");
    if (args.empty())
        throw std::invalid_argument("function '" + functor + "' needs at least one argument");
    auto node = std::make_shared<Node>();
    node->kind = Kind::Function;
    node->text = std::move(functor);
    std::size_t deepest = 0;
    for (const auto& a : args) {
        node->ground = node->ground && a.is_ground();
        deepest = std::max(deepest, a.depth());
    }
    node->depth = deepest + 1;
    node->args = std::move(args);
    return Term(std::move(node));
}

Term::Kind Term::kind() const noexcept { return node_->kind; }
bool Term::is_anonymous() const noexcept { return node_->kind == Kind::Variable && node_->text.empty(); }
const std::string& Term::text() const noexcept { return node_->text; }
Mutability Term::mutability() const noexcept { return node_->mutability; }
std::span<const Term> Term::args() const noexcept { return node_->args; }
bool Term::is_ground() const noexcept { return node_->ground; }
std::size_t Term::depth() const noexcept { return node_->depth; }

bool operator==(const Term& a, const Term& b) noexcept {
    return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Term& a, const Term& b) noexcept {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    if (auto c = a.text().compare(b.text()); c != 0) return c <=> 0;
    if (auto c = a.mutability() <=> b.mutability(); c != 0) return c;
    auto xs = a.args();
    auto ys = b.args();
    return std::lexicographical_compare_three_way(xs.begin(), xs.end(), ys.begin(), ys.end());
}

// ---------------------------------------------------------------------------

void BindingSet::bind(const std::string& name, const Term& value) {
    if (name.empty()) throw std::invalid_argument("the anonymous variable cannot be bound");
    if (!value.is_ground())
        throw NonGroundValue("binding for '" + name + "' is not ground: " + render_term(value));
    map_.insert_or_assign(name, value);
}

const Term* BindingSet::find(std::string_view name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
}

void BindingSet::merge_overwrite(const BindingSet& other) {
    for (const auto& [k, v] : other.map_) map_.insert_or_assign(k, v);
}

// ---------------------------------------------------------------------------

TermSyntaxError::TermSyntaxError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}

namespace {

class TermParser {
public:
    explicit TermParser(std::string_view in) : in_(in) {}

    Term parse() {
        skip_ws();
        if (at_end()) throw TermSyntaxError("empty term", pos_);
        Term t = term();
        skip_ws();
        if (!at_end()) fail("unexpected '" + std::string(1, in_[pos_]) + "'");
        return t;
    }

private:
    bool at_end() const { return pos_ >= in_.size(); }
    char peek() const { return at_end() ? '\0' : in_[pos_]; }

    [[noreturn]] void fail(const std::string& msg) const { throw TermSyntaxError(msg, pos_); }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
    }

    std::string identifier() {
        std::size_t start = pos_;
        while (!at_end() && is_identifier_char(in_[pos_])) ++pos_;
        return std::string(in_.substr(start, pos_ - start));
    }

    Term term() {
        skip_ws();
        char c = peek();
        if (c == '?') return variable();
        if (c == '"') return quoted();
        if (!is_identifier_char(c)) {
            if (at_end()) fail("expected a term");
            if (c == '(') fail("empty functor");
            fail("illegal character '" + std::string(1, c) + "'");
        }
        std::string name = identifier();
        skip_ws();
        if (peek() != '(') return Term::constant(std::move(name));
        ++pos_;
        std::vector<Term> args;
        args.push_back(term());
        skip_ws();
        while (peek() == ',') {
            ++pos_;
            args.push_back(term());
            skip_ws();
        }
        if (peek() != ')') fail(at_end() ? "unbalanced parentheses" : "expected ',' or ')'");
        ++pos_;
        return Term::function(std::move(name), std::move(args));
    }

    Term variable() {
        ++pos_;
        Mutability mut = Mutability::Immutable;
        if (peek() == '?') {
            ++pos_;
            mut = Mutability::Mutable;
            if (!is_identifier_char(peek())) fail("'\?\?' must be followed by a variable name");
        }
        if (!is_identifier_char(peek())) return Term::anonymous();
        return Term::variable(identifier(), mut);
    }

    Term quoted() {
        std::size_t start = pos_++;
        std::string text;
        while (true) {
            if (at_end()) throw TermSyntaxError("unterminated string", start);
            char c = in_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                text.push_back(c);
                continue;
            }
            if (at_end()) throw TermSyntaxError("unterminated string", start);
            switch (char e = in_[pos_++]) {
                case '"': text.push_back('"'); break;
                case '\\': text.push_back('\\'); break;
                case 'n': text.push_back('\n'); break;
                case 't': text.push_back('\t'); break;
                case 'r': text.push_back('\r'); break;
                default: --pos_; fail("unknown escape '\\" + std::string(1, e) + "'");
            }
        }
        if (text.empty()) throw TermSyntaxError("empty quoted constant", start);
        skip_ws();
        if (peek() == '(') fail("a quoted constant cannot be a functor");
        return Term::constant(std::move(text));
    }

    std::string_view in_;
    std::size_t pos_ = 0;
};

void render_into(const Term& t, std::string& out) {
    switch (t.kind()) {
        case Term::Kind::Constant:
            if (is_identifier(t.text())) {
                out += t.text();
                return;
            }
            out.push_back('"');
            for (char c : t.text()) {
                switch (c) {
                    case '"': out += "\\\""; break;
                    case '\\': out += "\\\\"; break;
                    case '\n': out += "\\n"; break;
                    case '\t': out += "\\t"; break;
                    case '\r': out += "\\r"; break;
                    default: out.push_back(c);
                }
            }
            out.push_back('"');
            return;
        case Term::Kind::Variable:
            out += t.mutability() == Mutability::Mutable ? "??" : "?";
            out += t.text();
            return;
        case Term::Kind::Function: {
            out += t.text();
            out.push_back('(');
            bool first = true;
            for (const auto& a : t.args()) {
                if (!first) out.push_back(',');
                first = false;
                render_into(a, out);
            }
            out.push_back(')');
            return;
        }
    }
}

bool match_rec(const Term& p, const Term& v, BindingSet& captured) {
    switch (p.kind()) {
        case Term::Kind::Constant:
            return v.is_constant() && v.text() == p.text();
        case Term::Kind::Variable: {
            if (p.is_anonymous()) return true;
            if (const Term* prior = captured.find(p.text())) return *prior == v;
            captured.bind(p.text(), v);
            return true;
        }
        case Term::Kind::Function: {
            if (!v.is_function() || v.text() != p.text() || v.arity() != p.arity()) return false;
            auto pa = p.args();
            auto va = v.args();
            for (std::size_t i = 0; i < pa.size(); ++i)
                if (!match_rec(pa[i], va[i], captured)) return false;
            return true;
        }
    }
    return false;
}

}  // namespace

Term parse_term(std::string_view input) { return TermParser(input).parse(); }

std::string render_term(const Term& t) {
    std::string out;
    render_into(t, out);
    return out;
}

bool match_capture(const Term& pattern, const Term& value, BindingSet& captured) {
    if (!value.is_ground()) throw NonGroundValue("cannot match against non-ground value " + render_term(value));
    return match_rec(pattern, value, captured);
}

bool matches(const Term& pattern, const Term& value) {
    BindingSet scratch;
    return match_capture(pattern, value, scratch);
}

BindingSet get_bindings(const Term& pattern, const Term& value) {
    BindingSet out;
    if (!match_capture(pattern, value, out))
        throw std::logic_error("get_bindings: " + render_term(pattern) + " does not match " + render_term(value));
    return out;
}

Term apply(const BindingSet& bindings, const Term& pattern) {
    switch (pattern.kind()) {
        case Term::Kind::Constant:
            return pattern;
        case Term::Kind::Variable:
            if (pattern.is_anonymous() || pattern.mutability() == Mutability::Mutable) return pattern;
            if (const Term* bound = bindings.find(pattern.text())) return *bound;
            return pattern;
        case Term::Kind::Function: {
            if (pattern.is_ground() || bindings.empty()) return pattern;
            std::vector<Term> args;
            args.reserve(pattern.arity());
            for (const auto& a : pattern.args()) args.push_back(apply(bindings, a));
            return Term::function(pattern.text(), std::move(args));
        }
    }
    return pattern;
}

std::string render_bindings(const BindingSet& bindings) {
    std::string out = "{";
    bool first = true;
    for (const auto& [name, value] : bindings) {
        if (!first) out += ", ";
        first = false;
        out += name;
        out += '=';
        out += render_term(value);
    }
    out += '}';
    return out;
}

}  // namespace acre
