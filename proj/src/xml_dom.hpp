#pragma once

// Minimal element tree over expat. Namespace URIs are stripped from element
// and attribute names; attributes from foreign namespaces are kept with a
// "uri|" prefix so callers can tell them apart.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acre::xml {

struct Element {
    std::string name;
    std::string ns;
    std::vector<std::pair<std::string, std::string>> attributes;
    std::vector<std::unique_ptr<Element>> children;
    std::string text;
    long line = 0;

    const std::string* attribute(std::string_view key) const {
        for (const auto& [k, v] : attributes)
            if (k == key) return &v;
        return nullptr;
    }
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long line)
        : std::runtime_error(what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

std::unique_ptr<Element> parse(std::string_view document);

std::string escape(std::string_view text);

}  // namespace acre::xml
