#pragma once

// Template-scoped wikitext extraction: just enough of the grammar to
// pull gap markers out of Wiktionary entries. Balanced-brace template
// scanning (nesting, [[...]] links, <nowiki> spans, HTML comments),
// level-2 language sections, and the headword/label conventions that
// mark defective Latin and Italian verbs:
//
//   {{la-verb|1+.nopass|discrepō}}        dotted flags on la-verb/la-conj
//   {{lb|it|defective|no past participle}} label phrases on definitions
//
// Anything that looks like a gap marker but has no known reading is kept
// verbatim so the compile step can surface it for human review.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gapcheck/errors.hpp"
#include "gapcheck/gapspec.hpp"
#include "gapcheck/pattern.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

struct WikiTemplate {
    std::string name;
    std::vector<std::string> positional;
    std::map<std::string, std::string> named;
    std::string raw;  // verbatim {{...}} span
};

namespace wikidetail {

// Advances past <nowiki>...</nowiki> and <!-- --> spans. Returns true if
// `i` pointed at the start of such a span.
inline bool skip_opaque(std::string_view s, std::size_t& i) {
    if (s.compare(i, 8, "<nowiki>") == 0) {
        std::size_t end = s.find("</nowiki>", i + 8);
        i = end == std::string_view::npos ? s.size() : end + 9;
        return true;
    }
    if (s.compare(i, 4, "<!--") == 0) {
        std::size_t end = s.find("-->", i + 4);
        i = end == std::string_view::npos ? s.size() : end + 3;
        return true;
    }
    return false;
}

} // namespace wikidetail

// Splits template content on '|' at nesting depth zero with respect to
// {{ }} and [[ ]], then separates positional from named parameters.
inline WikiTemplate parse_template(std::string_view raw) {
    WikiTemplate t;
    t.raw = std::string(raw);
    std::string_view inner = raw;
    if (inner.starts_with("{{")) inner.remove_prefix(2);
    if (inner.ends_with("}}")) inner.remove_suffix(2);

    std::vector<std::string> parts;
    std::string cur;
    int brace = 0, bracket = 0;
    std::size_t i = 0;
    while (i < inner.size()) {
        if (wikidetail::skip_opaque(inner, i)) continue;
        if (inner.compare(i, 2, "{{") == 0) { brace++; cur += "{{"; i += 2; continue; }
        if (inner.compare(i, 2, "}}") == 0 && brace > 0) { brace--; cur += "}}"; i += 2; continue; }
        if (inner.compare(i, 2, "[[") == 0) { bracket++; cur += "[["; i += 2; continue; }
        if (inner.compare(i, 2, "]]") == 0 && bracket > 0) { bracket--; cur += "]]"; i += 2; continue; }
        if (inner[i] == '|' && brace == 0 && bracket == 0) {
            parts.push_back(cur);
            cur.clear();
            ++i;
            continue;
        }
        cur += inner[i++];
    }
    parts.push_back(cur);

    t.name = std::string(text::trim(parts.empty() ? "" : parts[0]));
    for (std::size_t p = 1; p < parts.size(); ++p) {
        std::string_view part = parts[p];
        // named iff '=' appears outside any nested template/link
        std::size_t eq = std::string_view::npos;
        int b = 0, k = 0;
        for (std::size_t j = 0; j < part.size(); ++j) {
            if (part.compare(j, 2, "{{") == 0) { b++; j++; continue; }
            if (part.compare(j, 2, "}}") == 0) { b--; j++; continue; }
            if (part.compare(j, 2, "[[") == 0) { k++; j++; continue; }
            if (part.compare(j, 2, "]]") == 0) { k--; j++; continue; }
            if (part[j] == '=' && b == 0 && k == 0) { eq = j; break; }
        }
        if (eq == std::string_view::npos) {
            t.positional.emplace_back(text::trim(part));
        } else {
            t.named[std::string(text::trim(part.substr(0, eq)))] =
                std::string(text::trim(part.substr(eq + 1)));
        }
    }
    return t;
}

// All top-level templates in `text`, in document order. Nested templates
// remain embedded in their parent's parameter values.
inline std::vector<WikiTemplate> extract_templates(std::string_view text) {
    std::vector<WikiTemplate> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (wikidetail::skip_opaque(text, i)) continue;
        if (text.compare(i, 2, "{{") != 0) { ++i; continue; }
        std::size_t start = i;
        int depth = 0;
        while (i < text.size()) {
            if (wikidetail::skip_opaque(text, i)) continue;
            if (text.compare(i, 2, "{{") == 0) { depth++; i += 2; continue; }
            if (text.compare(i, 2, "}}") == 0) {
                depth--;
                i += 2;
                if (depth == 0) break;
                continue;
            }
            ++i;
        }
        if (depth == 0)
            out.push_back(parse_template(text.substr(start, i - start)));
        // unbalanced braces: scan simply moves on
    }
    return out;
}

// The body of the "==<language>==" level-2 section, up to the next
// level-2 heading. Heading match is exact-level: "===Etymology===" does
// not terminate a section.
inline std::string extract_language_section(std::string_view wikitext, std::string_view language) {
    std::size_t pos = 0;
    std::optional<std::size_t> body_start;
    while (pos <= wikitext.size()) {
        std::size_t eol = wikitext.find('\n', pos);
        std::string_view line = wikitext.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        std::string_view trimmed = text::trim(line);
        bool level2 = trimmed.size() > 4 && trimmed.starts_with("==") && trimmed.ends_with("==") &&
                      trimmed[2] != '=' && trimmed[trimmed.size() - 3] != '=';
        if (level2) {
            std::string_view title = text::trim(trimmed.substr(2, trimmed.size() - 4));
            if (body_start) return std::string(wikitext.substr(*body_start, pos - *body_start));
            if (title == language) body_start = eol == std::string_view::npos ? wikitext.size() : eol + 1;
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (body_start) return std::string(wikitext.substr(*body_start));
    throw DataError("no '" + std::string(language) + "' section on this page");
}

// ── Gap annotations ──────────────────────────────────────────────────

struct RawGapAnnotation {
    std::string page;           // page title
    std::string language;       // section name ("Latin", "Italian")
    std::string template_name;  // where the marker came from
    std::string lemma;          // head= override, else page title
    std::vector<std::string> phrases;  // e.g. {"no passive"}
    std::string raw_span;       // verbatim template text, kept for audit
};

namespace wikidetail {

inline void emit(std::vector<RawGapAnnotation>& out, const std::string& page,
                 std::string_view language, const WikiTemplate& t, const std::string& lemma,
                 std::string phrase) {
    RawGapAnnotation ann;
    ann.page = page;
    ann.language = std::string(language);
    ann.template_name = t.name;
    ann.lemma = lemma;
    ann.phrases = {std::move(phrase)};
    ann.raw_span = t.raw;
    out.push_back(std::move(ann));
}

} // namespace wikidetail

namespace wikidetail {

// Dotted subtags of la-verb/la-conj that assert a missing sub-paradigm.
inline std::optional<std::string> flag_phrase(std::string_view subtag) {
    static const std::map<std::string_view, std::string_view> kFlags = {
        {"nopass", "no passive"},   {"noperf", "no perfect"}, {"nosup", "no supine"},
        {"noimp", "no imperative"}, {"nofut", "no future"},
    };
    auto it = kFlags.find(subtag);
    if (it != kFlags.end()) return std::string(it->second);
    // Unknown no-* markers are preserved verbatim rather than dropped.
    if (subtag.starts_with("no") && subtag.size() > 2) return std::string(subtag);
    return std::nullopt;
}

} // namespace wikidetail

// Scans the requested language section for defectivity markers. One
// annotation per gap phrase, so a template carrying both a known and an
// unknown flag still contributes its known claim while the unknown one
// is surfaced separately.
inline std::vector<RawGapAnnotation> parse_gap_annotations(const std::string& page_title,
                                                           std::string_view wikitext,
                                                           std::string_view language) {
    std::string section = extract_language_section(wikitext, language);
    std::vector<RawGapAnnotation> out;

    std::string lemma = page_title;
    std::vector<WikiTemplate> templates = extract_templates(section);

    // A head= parameter on a headword template overrides the page title
    // (Wiktionary titles drop stress accents that headwords carry).
    for (const WikiTemplate& t : templates) {
        if ((t.name == "la-verb" || t.name == "it-verb") && t.named.count("head") &&
            !t.named.at("head").empty()) {
            lemma = t.named.at("head");
            break;
        }
    }

    for (const WikiTemplate& t : templates) {
        if (t.name == "la-verb" || t.name == "la-conj") {
            if (!t.positional.empty()) {
                for (std::string_view subtag : text::split(t.positional[0], '.')) {
                    if (auto phrase = wikidetail::flag_phrase(text::trim(subtag)))
                        wikidetail::emit(out, page_title, language, t, lemma, *phrase);
                }
            }
        } else if (t.name == "lb" || t.name == "lbl" || t.name == "label") {
            // first positional is the language code; the rest are labels
            for (std::size_t i = 1; i < t.positional.size(); ++i) {
                std::string_view label = t.positional[i];
                if (label == "defective" || label.starts_with("no "))
                    wikidetail::emit(out, page_title, language, t, lemma, std::string(label));
            }
        }
    }
    return out;
}

// ── Phrase map ───────────────────────────────────────────────────────

// Where Wiktionary's descriptive vocabulary meets UD's: gap phrases to
// feature patterns. Shipped defaults cover the Latin/Italian claims the
// validation pipeline understands; everything else stays unmapped and is
// reported for review.
class PhraseMap {
public:
    static PhraseMap defaults() {
        PhraseMap m;
        m.set("no passive", {make("VERB", "Voice=Pass")});
        m.set("no perfect", {make("VERB", "Aspect=Perf")});
        m.set("no past participle", {make("VERB", "Tense=Past|VerbForm=Part")});
        m.set("no future", {make("VERB", "Tense=Fut")});
        return m;
    }

    void set(const std::string& phrase, std::vector<FeaturePattern> patterns) {
        map_[phrase] = std::move(patterns);
    }

    const std::vector<FeaturePattern>* find(const std::string& phrase) const {
        auto it = map_.find(phrase);
        return it == map_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return map_.size(); }

    // Overrides/extends from JSON: {"phrase": [{"upos": "...", "feats": {...}}], ...}
    void load_json(const std::string& body, const std::string& source = "<phrase-map>") {
        nlohmann::ordered_json doc;
        try {
            doc = nlohmann::ordered_json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(source + ": invalid JSON: " + e.what());
        }
        if (!doc.is_object()) throw DataError(source + ": expected an object of phrase entries");
        for (const auto& [phrase, patterns] : doc.items()) {
            if (!patterns.is_array() || patterns.empty())
                throw DataError(source + ": phrase '" + phrase + "' needs a non-empty pattern array");
            std::vector<FeaturePattern> parsed;
            for (const auto& pj : patterns) parsed.push_back(detail::pattern_from_json(pj, 0, phrase));
            set(phrase, std::move(parsed));
        }
    }

private:
    static FeaturePattern make(const char* upos, const char* feats) {
        FeaturePattern p;
        p.upos = upos;
        p.feats = FeatureBundle::parse(feats);
        return p;
    }

    std::map<std::string, std::vector<FeaturePattern>> map_;
};

struct CompileResult {
    std::vector<GapSpec> specs;               // one per lemma, patterns deduplicated
    std::vector<RawGapAnnotation> mapped;     // annotations absorbed into specs
    std::vector<RawGapAnnotation> unmapped;   // for human review; never silently dropped
};

inline std::string section_language_tag(std::string_view section) {
    if (section == "Latin") return "la";
    if (section == "Italian") return "it";
    std::string tag = text::lowercase(section);
    return tag.empty() ? "und" : tag;
}

// Partitions annotations into mapped and unmapped (an annotation maps
// only if every one of its phrases does) and folds the mapped ones into
// per-lemma GapSpecs.
inline CompileResult compile_gapspecs(const std::vector<RawGapAnnotation>& annotations,
                                      const PhraseMap& phrase_map) {
    CompileResult result;
    std::map<std::pair<std::string, std::string>, GapSpec> by_lemma;  // (language tag, lemma)

    for (const RawGapAnnotation& ann : annotations) {
        std::vector<FeaturePattern> patterns;
        bool all_known = !ann.phrases.empty();
        for (const std::string& phrase : ann.phrases) {
            const auto* mapped = phrase_map.find(phrase);
            if (!mapped) {
                all_known = false;
                break;
            }
            patterns.insert(patterns.end(), mapped->begin(), mapped->end());
        }
        if (!all_known) {
            result.unmapped.push_back(ann);
            continue;
        }
        result.mapped.push_back(ann);

        std::string tag = section_language_tag(ann.language);
        GapSpec& spec = by_lemma[{tag, ann.lemma}];
        if (spec.lemma.empty()) {
            spec.language = tag;
            spec.lemma = ann.lemma;
            spec.source = "wiktionary:" + ann.page + "#" + ann.language;
        }
        for (FeaturePattern& p : patterns)
            if (std::find(spec.patterns.begin(), spec.patterns.end(), p) == spec.patterns.end())
                spec.patterns.push_back(std::move(p));
        if (spec.note.find(ann.raw_span) == std::string::npos) {
            if (!spec.note.empty()) spec.note += "; ";
            spec.note += ann.raw_span;
        }
    }

    for (auto& [key, spec] : by_lemma) result.specs.push_back(std::move(spec));
    return result;
}

} // namespace gapcheck
