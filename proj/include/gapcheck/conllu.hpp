#pragma once

// Streaming CoNLL-U reader. Single pass, one line of lookahead, memory
// independent of input size; multi-gigabyte tagged corpora are the
// normal input. Only FORM, LEMMA, UPOS and FEATS are extracted.
//
// Lenient mode (the default for web-crawl output) skips malformed lines
// and repairs bad UTF-8, keeping diagnostics counters. Strict mode
// throws ParseError with file:line context and suits treebank fixtures.

#include <algorithm>
#include <array>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>

#include "gapcheck/errors.hpp"
#include "gapcheck/feature_bundle.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

struct AnnotatedToken {
    std::string form;
    std::string lemma;
    std::string upos;
    FeatureBundle feats;
};

enum class ParseMode { Lenient, Strict };

struct ReaderOptions {
    ParseMode mode = ParseMode::Lenient;
};

struct ReaderDiagnostics {
    std::uint64_t lines = 0;             // physical lines consumed
    std::uint64_t tokens = 0;            // tokens yielded
    std::uint64_t malformed_lines = 0;   // would-be token lines rejected (lenient)
    std::uint64_t malformed_feats = 0;   // tokens yielded with FEATS reset to empty (lenient)
    std::uint64_t invalid_utf8 = 0;      // lines that needed byte repair (lenient)
    std::uint64_t skipped_ranges = 0;    // multiword-token range lines (ID "3-4")
    std::uint64_t skipped_empty_nodes = 0;  // empty-node lines (ID "3.1")
};

// The 17 Universal POS tags. "_" is additionally accepted as "untagged".
inline bool is_upos_tag(std::string_view s) {
    static constexpr std::array<std::string_view, 17> kTags = {
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};
    return std::binary_search(kTags.begin(), kTags.end(), s);
}

class ConlluReader {
public:
    explicit ConlluReader(std::istream& in, ReaderOptions options = {},
                          std::string source_name = "<stream>")
        : in_(in), options_(options), source_(std::move(source_name)) {}

    ConlluReader(const ConlluReader&) = delete;
    ConlluReader& operator=(const ConlluReader&) = delete;

    // Yields the next basic token, or returns false at end of input.
    bool next(AnnotatedToken& out) {
        while (std::getline(in_, line_)) {
            ++diag_.lines;
            if (!line_.empty() && line_.back() == '\r') line_.pop_back();
            if (line_.empty() || line_[0] == '#') continue;

            std::string_view line = line_;
            if (!text::utf8_valid(line)) {
                if (options_.mode == ParseMode::Strict)
                    throw ParseError(source_, diag_.lines, "invalid UTF-8");
                ++diag_.invalid_utf8;
                text::utf8_sanitize(line, repaired_);
                line = repaired_;
            }

            if (parse_token_line(line, out)) {
                ++diag_.tokens;
                return true;
            }
        }
        return false;
    }

    const ReaderDiagnostics& diagnostics() const { return diag_; }
    const std::string& source() const { return source_; }

private:
    enum class IdKind { Basic, Range, EmptyNode, Bad };

    static IdKind classify_id(std::string_view id) {
        if (id.empty()) return IdKind::Bad;
        std::size_t i = 0;
        while (i < id.size() && id[i] >= '0' && id[i] <= '9') ++i;
        if (i == 0) return IdKind::Bad;
        if (i == id.size()) return IdKind::Basic;
        char sep = id[i];
        if (sep != '-' && sep != '.') return IdKind::Bad;
        std::size_t j = i + 1;
        while (j < id.size() && id[j] >= '0' && id[j] <= '9') ++j;
        if (j == i + 1 || j != id.size()) return IdKind::Bad;
        return sep == '-' ? IdKind::Range : IdKind::EmptyNode;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(source_, diag_.lines, msg); }

    bool reject(const std::string& msg) {
        if (options_.mode == ParseMode::Strict) fail(msg);
        ++diag_.malformed_lines;
        return false;
    }

    // Returns true and fills `out` for a basic token line; false for
    // lines that are skipped (ranges, empty nodes, rejected lines).
    bool parse_token_line(std::string_view line, AnnotatedToken& out) {
        std::array<std::string_view, 10> col;
        std::size_t ncols = 0, start = 0;
        bool terminated = false;  // 10th column must run to end of line
        while (ncols < 10) {
            std::size_t tab = line.find('\t', start);
            if (tab == std::string_view::npos) {
                col[ncols++] = line.substr(start);
                terminated = true;
                break;
            }
            col[ncols++] = line.substr(start, tab - start);
            start = tab + 1;
        }
        if (ncols != 10 || !terminated)
            return reject("expected 10 tab-separated columns");

        switch (classify_id(col[0])) {
        case IdKind::Range:
            ++diag_.skipped_ranges;
            return false;
        case IdKind::EmptyNode:
            ++diag_.skipped_empty_nodes;
            return false;
        case IdKind::Bad:
            return reject("bad token ID '" + std::string(col[0]) + "'");
        case IdKind::Basic:
            break;
        }

        if (col[1].empty() || col[2].empty() || col[3].empty())
            return reject("empty FORM/LEMMA/UPOS column");
        if (col[3] != "_" && !is_upos_tag(col[3]))
            return reject("unknown UPOS '" + std::string(col[3]) + "'");

        out.form.assign(col[1]);
        out.lemma.assign(col[2]);
        out.upos.assign(col[3]);

        std::string err;
        if (!FeatureBundle::try_parse(col[5], out.feats, &err)) {
            if (options_.mode == ParseMode::Strict) fail(err);
            // Count the token, but with an empty bundle.
            out.feats = FeatureBundle();
            ++diag_.malformed_feats;
        }
        return true;
    }

    std::istream& in_;
    ReaderOptions options_;
    std::string source_;
    std::string line_;
    std::string repaired_;
    ReaderDiagnostics diag_;
};

// Convenience for fixtures and tests; bulk paths should iterate the
// reader directly.
inline std::vector<AnnotatedToken> read_all(std::istream& in, ReaderOptions options = {},
                                            std::string source_name = "<stream>") {
    ConlluReader reader(in, options, std::move(source_name));
    std::vector<AnnotatedToken> out;
    AnnotatedToken tok;
    while (reader.next(tok)) out.push_back(tok);
    return out;
}

} // namespace gapcheck
