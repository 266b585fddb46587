#include "xml_dom.hpp"

#include <expat.h>

#include <tuple>

namespace acre::xml {

namespace {

constexpr char kNsSeparator = '|';

struct Builder {
    XML_Parser parser = nullptr;
    std::unique_ptr<Element> root;
    std::vector<Element*> stack;
    std::string error;
};

std::pair<std::string, std::string> split_name(const char* raw) {
    std::string_view s(raw);
    auto bar = s.rfind(kNsSeparator);
    if (bar == std::string_view::npos) return {std::string(s), {}};
    return {std::string(s.substr(bar + 1)), std::string(s.substr(0, bar))};
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto* b = static_cast<Builder*>(data);
    auto el = std::make_unique<Element>();
    std::tie(el->name, el->ns) = split_name(name);
    el->line = static_cast<long>(XML_GetCurrentLineNumber(b->parser));
    for (int i = 0; attrs[i] != nullptr; i += 2) el->attributes.emplace_back(attrs[i], attrs[i + 1]);
    Element* raw = el.get();
    if (b->stack.empty())
        b->root = std::move(el);
    else
        b->stack.back()->children.push_back(std::move(el));
    b->stack.push_back(raw);
}

void XMLCALL on_end(void* data, const XML_Char*) {
    static_cast<Builder*>(data)->stack.pop_back();
}

void XMLCALL on_text(void* data, const XML_Char* s, int len) {
    auto* b = static_cast<Builder*>(data);
    if (!b->stack.empty()) b->stack.back()->text.append(s, static_cast<std::size_t>(len));
}

}  // namespace

std::unique_ptr<Element> parse(std::string_view document) {
    Builder b;
    std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(
        XML_ParserCreateNS(nullptr, kNsSeparator), &XML_ParserFree);
    if (!parser) throw std::bad_alloc();
    b.parser = parser.get();
    XML_SetUserData(parser.get(), &b);
    XML_SetElementHandler(parser.get(), on_start, on_end);
    XML_SetCharacterDataHandler(parser.get(), on_text);
    if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE) ==
        XML_STATUS_ERROR) {
        throw ParseError(XML_ErrorString(XML_GetErrorCode(parser.get())),
                         static_cast<long>(XML_GetCurrentLineNumber(parser.get())));
    }
    if (!b.root) throw ParseError("no root element", 1);
    return std::move(b.root);
}

std::string escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\n': out += "&#10;"; break;
            case '\t': out += "&#9;"; break;
            case '\r': out += "&#13;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace acre::xml
