#pragma once

// Streaming reader for MediaWiki XML exports: yields (title, wikitext)
// for main-namespace pages without ever holding more than one page in
// memory. Not a general XML parser; it understands exactly the
// <page>/<title>/<ns>/<text> shape that dumps use.

#include <functional>
#include <istream>
#include <string>
#include <string_view>

#include "gapcheck/errors.hpp"

namespace gapcheck {

namespace dumpdetail {

inline std::string xml_unescape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i++]);
            continue;
        }
        auto try_entity = [&](std::string_view entity, char replacement) {
            if (s.compare(i, entity.size(), entity) == 0) {
                out.push_back(replacement);
                i += entity.size();
                return true;
            }
            return false;
        };
        if (try_entity("&lt;", '<') || try_entity("&gt;", '>') || try_entity("&amp;", '&') ||
            try_entity("&quot;", '"') || try_entity("&apos;", '\''))
            continue;
        out.push_back(s[i++]);
    }
    return out;
}

// Text between `open` and `close` if `line` holds the opening tag;
// accumulation may continue across lines via `pending`.
inline bool find_open(std::string_view line, std::string_view tag_name, std::size_t& content_start) {
    std::size_t pos = line.find("<" + std::string(tag_name));
    if (pos == std::string_view::npos) return false;
    std::size_t end = line.find('>', pos);
    if (end == std::string_view::npos) return false;
    // reject closing / different tags ("<textarea", "</text>")
    char after = line[pos + 1 + tag_name.size()];
    if (after != ' ' && after != '>') return false;
    content_start = end + 1;
    return true;
}

} // namespace dumpdetail

// Calls fn(title, wikitext) per <page> with ns 0 (or no <ns> element).
// Returning false from fn stops the scan. Returns pages visited.
inline std::uint64_t for_each_dump_page(
    std::istream& in, const std::function<bool(const std::string&, const std::string&)>& fn) {
    std::string line, title, text;
    std::uint64_t pages = 0;
    bool in_page = false, in_text = false, ns_ok = true;

    while (std::getline(in, line)) {
        if (!in_page) {
            if (line.find("<page>") != std::string::npos) {
                in_page = true;
                title.clear();
                text.clear();
                ns_ok = true;
            }
            continue;
        }
        if (in_text) {
            std::size_t close = line.find("</text>");
            if (close == std::string::npos) {
                text += dumpdetail::xml_unescape(line);
                text += '\n';
            } else {
                text += dumpdetail::xml_unescape(std::string_view(line).substr(0, close));
                in_text = false;
            }
            continue;
        }
        if (std::size_t start; dumpdetail::find_open(line, "title", start)) {
            std::size_t close = line.find("</title>", start);
            if (close != std::string::npos)
                title = dumpdetail::xml_unescape(std::string_view(line).substr(start, close - start));
            continue;
        }
        if (std::size_t start; dumpdetail::find_open(line, "ns", start)) {
            std::size_t close = line.find("</ns>", start);
            if (close != std::string::npos)
                ns_ok = std::string_view(line).substr(start, close - start) == "0";
            continue;
        }
        if (std::size_t start; dumpdetail::find_open(line, "text", start)) {
            std::size_t close = line.find("</text>", start);
            if (close == std::string::npos) {
                text += dumpdetail::xml_unescape(std::string_view(line).substr(start));
                text += '\n';
                in_text = true;
            } else {
                text += dumpdetail::xml_unescape(std::string_view(line).substr(start, close - start));
            }
            continue;
        }
        if (line.find("</page>") != std::string::npos) {
            in_page = false;
            if (ns_ok && !title.empty()) {
                ++pages;
                if (!fn(title, text)) break;
            }
        }
    }
    return pages;
}

} // namespace gapcheck
