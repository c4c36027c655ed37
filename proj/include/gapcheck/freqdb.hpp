#pragma once

// The frequency database: occurrence counts keyed on (lemma, UPOS,
// feature bundle), the paradigm cell, with lemma and bundle marginals
// and the corpus total N derived from the pair counts, never stored.
//
// UPOS is part of the key so that gap validation can restrict queries to
// verbs at query time: purported participles that are really adjectival
// uses must not count as attestations.
//
// Persistence is a versioned TSV, bit-exact: UTF-8, '\t' separators,
// '\n' line endings, rows sorted by key, FNV-1a checksum over the row
// bytes. Counts are 64-bit; billion-token corpora overflow 32 bits.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gapcheck/conllu.hpp"
#include "gapcheck/errors.hpp"
#include "gapcheck/feature_bundle.hpp"
#include "gapcheck/pattern.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

struct BuildOptions {
    bool lowercase_lemmas = true;            // sentence-initial caps would split counts
    std::vector<std::string> exclude_upos;   // applied at build time, recorded in metadata

    std::string normalize_lemma(std::string_view lemma) const {
        return lowercase_lemmas ? text::lowercase(lemma) : std::string(lemma);
    }

    bool excludes(std::string_view upos) const {
        return std::find(exclude_upos.begin(), exclude_upos.end(), upos) != exclude_upos.end();
    }

    // Canonical encoding; merge compatibility is string equality of this.
    std::string encode() const {
        std::vector<std::string> ex = exclude_upos;
        std::sort(ex.begin(), ex.end());
        ex.erase(std::unique(ex.begin(), ex.end()), ex.end());
        std::string out = lowercase_lemmas ? "normalize=lower" : "normalize=none";
        out += ";exclude=";
        out += text::join(ex, ",");
        return out;
    }

    static BuildOptions decode(std::string_view encoded) {
        BuildOptions opts;
        opts.exclude_upos.clear();
        bool saw_normalize = false, saw_exclude = false;
        for (std::string_view field : text::split(encoded, ';')) {
            std::size_t eq = field.find('=');
            if (eq == std::string_view::npos) throw DataError("bad options field '" + std::string(field) + "'");
            std::string_view key = field.substr(0, eq), val = field.substr(eq + 1);
            if (key == "normalize") {
                if (val == "lower") opts.lowercase_lemmas = true;
                else if (val == "none") opts.lowercase_lemmas = false;
                else throw DataError("unknown normalize mode '" + std::string(val) + "'");
                saw_normalize = true;
            } else if (key == "exclude") {
                if (!val.empty())
                    for (std::string_view tag : text::split(val, ','))
                        opts.exclude_upos.emplace_back(tag);
                saw_exclude = true;
            } else {
                throw DataError("unknown options key '" + std::string(key) + "'");
            }
        }
        if (!saw_normalize || !saw_exclude) throw DataError("incomplete options string '" + std::string(encoded) + "'");
        return opts;
    }
};

struct DbEntry {
    std::string lemma;
    std::string upos;
    FeatureBundle bundle;
    std::string feats;  // cached bundle.serialize(); row sort key component
    std::uint64_t count = 0;
};

struct MarginalEntry {
    std::string upos;
    FeatureBundle bundle;
    std::uint64_t count = 0;
};

class FrequencyDatabase {
public:
    FrequencyDatabase() = default;

    const std::string& language() const { return language_; }
    const BuildOptions& options() const { return options_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    std::uint64_t total() const { return total_; }
    const std::vector<DbEntry>& entries() const { return entries_; }
    const std::vector<MarginalEntry>& marginals() const { return marginals_; }

    // Provenance labeling (corpus id, input list). Never part of the
    // statistics; values are comma-separated sets under merge.
    void set_metadata(const std::string& key, const std::string& value) {
        if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos ||
            value.find('\n') != std::string::npos)
            throw ConfigError("metadata keys must not contain '=' and values must be single-line");
        metadata_[key] = value;
    }
    void clear_metadata() { metadata_.clear(); }

    // ── Queries ──────────────────────────────────────────────────────

    // n_w: occurrences of `lemma` in cells satisfying `pattern`.
    std::uint64_t count_pair(std::string_view lemma, const FeaturePattern& pattern) const {
        auto [lo, hi] = lemma_range(lemma);
        std::uint64_t sum = 0;
        for (auto it = lo; it != hi; ++it)
            if (pattern.matches(it->upos, it->bundle)) sum += it->count;
        return sum;
    }

    // n_l: occurrences of `lemma` in any cell.
    std::uint64_t count_lemma(std::string_view lemma) const {
        auto it = lemma_counts_.find(std::string(lemma));
        return it == lemma_counts_.end() ? 0 : it->second;
    }

    // n_f: occurrences of cells satisfying `pattern`, across all lemmata.
    std::uint64_t count_marginal(const FeaturePattern& pattern) const {
        if (pattern.vacuous()) return total_;
        std::uint64_t sum = 0;
        for (const MarginalEntry& m : marginals_)
            if (pattern.matches(m.upos, m.bundle)) sum += m.count;
        return sum;
    }

    // Count conservation: sum of pair counts equals every marginal's sum
    // equals N. Cheap relative to a load; tests lean on it heavily.
    bool consistent() const {
        std::uint64_t pair_sum = 0, lemma_sum = 0, marg_sum = 0;
        for (const DbEntry& e : entries_) {
            if (e.count == 0) return false;
            pair_sum += e.count;
        }
        for (const auto& [lemma, n] : lemma_counts_) lemma_sum += n;
        for (const MarginalEntry& m : marginals_) marg_sum += m.count;
        return pair_sum == total_ && lemma_sum == total_ && marg_sum == total_;
    }

    friend bool operator==(const FrequencyDatabase& a, const FrequencyDatabase& b) {
        if (a.language_ != b.language_ || a.total_ != b.total_ || a.metadata_ != b.metadata_ ||
            a.options_.encode() != b.options_.encode() || a.entries_.size() != b.entries_.size())
            return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            const DbEntry& x = a.entries_[i];
            const DbEntry& y = b.entries_[i];
            if (x.lemma != y.lemma || x.upos != y.upos || x.feats != y.feats || x.count != y.count)
                return false;
        }
        return true;
    }

    // ── Merge ────────────────────────────────────────────────────────

    // Keywise sum. Refuses incompatible inputs: merging differently
    // normalized counts would silently corrupt every statistic downstream.
    static FrequencyDatabase merge(const FrequencyDatabase& a, const FrequencyDatabase& b) {
        if (a.language_ != b.language_)
            throw ConfigError("cannot merge databases for languages '" + a.language_ + "' and '" +
                              b.language_ + "'");
        if (a.options_.encode() != b.options_.encode())
            throw ConfigError("cannot merge databases with different build options ('" +
                              a.options_.encode() + "' vs '" + b.options_.encode() + "')");

        FrequencyDatabase out;
        out.language_ = a.language_;
        out.options_ = a.options_;
        out.metadata_ = merge_metadata(a.metadata_, b.metadata_);
        out.entries_.reserve(a.entries_.size() + b.entries_.size());

        auto ia = a.entries_.begin(), ib = b.entries_.begin();
        while (ia != a.entries_.end() || ib != b.entries_.end()) {
            int cmp;
            if (ia == a.entries_.end()) cmp = 1;
            else if (ib == b.entries_.end()) cmp = -1;
            else cmp = key_compare(*ia, *ib);
            if (cmp < 0) out.entries_.push_back(*ia++);
            else if (cmp > 0) out.entries_.push_back(*ib++);
            else {
                DbEntry e = *ia++;
                e.count += ib++->count;
                out.entries_.push_back(std::move(e));
            }
        }
        out.derive();
        return out;
    }

    // ── Persistence ──────────────────────────────────────────────────

    static constexpr std::string_view kFormatLine = "#!gapcheck-db v1";

    void save(std::ostream& out) const {
        out << kFormatLine << '\n';
        out << "#!language " << language_ << '\n';
        out << "#!options " << options_.encode() << '\n';
        for (const auto& [key, value] : metadata_) out << "#!meta " << key << '=' << value << '\n';
        std::uint64_t checksum = text::kFnvOffset;
        std::string row;
        for (const DbEntry& e : entries_) {
            row.clear();
            row += e.lemma;
            row += '\t';
            row += e.upos;
            row += '\t';
            row += e.feats;
            row += '\t';
            row += std::to_string(e.count);
            row += '\n';
            checksum = text::fnv1a64(row, checksum);
            out << row;
        }
        out << "#!checksum fnv1a64:" << text::hex64(checksum) << '\n';
        if (!out) throw DataError("write failure while saving database");
    }

    static FrequencyDatabase load(std::istream& in, const std::string& source = "<stream>") {
        FrequencyDatabase db;
        std::string line;
        std::uint64_t lineno = 0;
        auto bad = [&](const std::string& msg) -> DataError {
            return DataError(source + ":" + std::to_string(lineno) + ": " + msg);
        };

        if (!read_line(in, line, lineno) || line != kFormatLine)
            throw bad("not a gapcheck database (expected '" + std::string(kFormatLine) + "')");
        if (!read_line(in, line, lineno) || !line.starts_with("#!language "))
            throw bad("missing #!language header");
        db.language_ = line.substr(11);
        if (db.language_.empty()) throw bad("empty language tag");
        if (!read_line(in, line, lineno) || !line.starts_with("#!options "))
            throw bad("missing #!options header");
        db.options_ = BuildOptions::decode(line.substr(10));

        std::uint64_t checksum = text::kFnvOffset;
        bool saw_checksum = false;
        const DbEntry* prev = nullptr;
        while (read_line(in, line, lineno)) {
            if (line.starts_with("#!meta ")) {
                if (!db.entries_.empty()) throw bad("#!meta after first row");
                std::string_view kv = std::string_view(line).substr(7);
                std::size_t eq = kv.find('=');
                if (eq == std::string_view::npos) throw bad("bad #!meta line");
                db.metadata_[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
                continue;
            }
            if (line.starts_with("#!checksum ")) {
                std::string_view want = std::string_view(line).substr(11);
                std::string got = "fnv1a64:" + text::hex64(checksum);
                if (want != got) throw bad("checksum mismatch (file says '" + std::string(want) +
                                           "', rows hash to '" + got + "')");
                saw_checksum = true;
                break;
            }
            checksum = text::fnv1a64(line + "\n", checksum);

            auto fields = text::split(line, '\t');
            if (fields.size() != 4) throw bad("expected 4 tab-separated fields");
            DbEntry e;
            e.lemma.assign(fields[0]);
            e.upos.assign(fields[1]);
            if (e.lemma.empty() || e.upos.empty()) throw bad("empty lemma or UPOS");
            std::string err;
            if (!FeatureBundle::try_parse(fields[2], e.bundle, &err)) throw bad(err);
            e.feats = e.bundle.serialize();
            if (e.feats != fields[2]) throw bad("non-canonical feature bundle '" + std::string(fields[2]) + "'");
            if (!text::parse_u64(fields[3], e.count)) throw bad("bad count '" + std::string(fields[3]) + "'");
            if (e.count == 0) throw bad("zero count for key '" + e.lemma + "\t" + e.upos + "\t" + e.feats + "'");
            if (prev && key_compare(*prev, e) >= 0) throw bad("rows not in strictly ascending key order");
            db.entries_.push_back(std::move(e));
            prev = &db.entries_.back();
        }
        if (!saw_checksum) throw bad("missing #!checksum trailer");
        if (read_line(in, line, lineno)) throw bad("trailing content after checksum");
        db.derive();
        return db;
    }

private:
    friend class DbBuilder;

    static int key_compare(const DbEntry& a, const DbEntry& b) {
        if (int c = a.lemma.compare(b.lemma)) return c;
        if (int c = a.upos.compare(b.upos)) return c;
        return a.feats.compare(b.feats);
    }

    static bool read_line(std::istream& in, std::string& line, std::uint64_t& lineno) {
        if (!std::getline(in, line)) return false;
        ++lineno;
        return true;
    }

    static std::map<std::string, std::string> merge_metadata(const std::map<std::string, std::string>& a,
                                                             const std::map<std::string, std::string>& b) {
        std::map<std::string, std::string> out = a;
        for (const auto& [key, value] : b) {
            auto it = out.find(key);
            if (it == out.end()) {
                out[key] = value;
            } else if (it->second != value) {
                // Treat conflicting values as comma-separated sets.
                std::vector<std::string> items;
                for (std::string_view v : text::split(it->second, ',')) items.emplace_back(v);
                for (std::string_view v : text::split(value, ',')) items.emplace_back(v);
                std::sort(items.begin(), items.end());
                items.erase(std::unique(items.begin(), items.end()), items.end());
                it->second = text::join(items, ",");
            }
        }
        return out;
    }

    // Rebuilds lemma counts, (upos, bundle) marginals and N from the
    // sorted pair counts.
    void derive() {
        lemma_counts_.clear();
        marginals_.clear();
        total_ = 0;
        std::map<std::pair<std::string, std::string>, std::uint64_t> margs;
        for (const DbEntry& e : entries_) {
            lemma_counts_[e.lemma] += e.count;
            margs[{e.upos, e.feats}] += e.count;
            total_ += e.count;
        }
        marginals_.reserve(margs.size());
        for (const auto& [key, count] : margs)
            marginals_.push_back({key.first, FeatureBundle::parse(key.second), count});
    }

    std::pair<std::vector<DbEntry>::const_iterator, std::vector<DbEntry>::const_iterator>
    lemma_range(std::string_view lemma) const {
        auto lo = std::lower_bound(entries_.begin(), entries_.end(), lemma,
                                   [](const DbEntry& e, std::string_view l) { return e.lemma < l; });
        auto hi = std::upper_bound(lo, entries_.end(), lemma,
                                   [](std::string_view l, const DbEntry& e) { return l < e.lemma; });
        return {lo, hi};
    }

    std::string language_ = "und";
    BuildOptions options_;
    std::map<std::string, std::string> metadata_;
    std::vector<DbEntry> entries_;  // sorted by (lemma, upos, feats), keys unique
    std::unordered_map<std::string, std::uint64_t> lemma_counts_;
    std::vector<MarginalEntry> marginals_;  // sorted by (upos, feats)
    std::uint64_t total_ = 0;
};

// Incremental builder for streaming ingestion; one instance per shard.
class DbBuilder {
public:
    explicit DbBuilder(std::string language, BuildOptions options = {})
        : language_(std::move(language)), options_(std::move(options)) {
        if (language_.empty()) throw ConfigError("language tag must not be empty");
    }

    void add(const AnnotatedToken& token) {
        // Untagged lemmata carry no paradigm cell; drop them here rather
        // than in the parser so diagnostics still see the token.
        if (token.lemma.empty() || token.lemma == "_") return;
        if (options_.excludes(token.upos)) return;
        key_.clear();
        key_ += options_.normalize_lemma(token.lemma);
        key_ += '\t';
        key_ += token.upos;
        key_ += '\t';
        key_ += token.feats.serialize();
        ++counts_[key_];
        ++added_;
    }

    std::uint64_t added() const { return added_; }

    FrequencyDatabase finish() {
        FrequencyDatabase db;
        db.language_ = language_;
        db.options_ = options_;
        db.entries_.reserve(counts_.size());
        for (const auto& [key, count] : counts_) {
            auto fields = text::split(key, '\t');
            DbEntry e;
            e.lemma.assign(fields[0]);
            e.upos.assign(fields[1]);
            e.feats.assign(fields[2]);
            e.bundle = FeatureBundle::parse(e.feats);
            e.count = count;
            db.entries_.push_back(std::move(e));
        }
        std::sort(db.entries_.begin(), db.entries_.end(),
                  [](const DbEntry& a, const DbEntry& b) { return FrequencyDatabase::key_compare(a, b) < 0; });
        db.derive();
        counts_.clear();
        added_ = 0;
        return db;
    }

private:
    std::string language_;
    BuildOptions options_;
    std::unordered_map<std::string, std::uint64_t> counts_;
    std::string key_;
    std::uint64_t added_ = 0;
};

inline FrequencyDatabase build_database(const std::vector<AnnotatedToken>& tokens,
                                        std::string language, BuildOptions options = {}) {
    DbBuilder builder(std::move(language), std::move(options));
    for (const AnnotatedToken& t : tokens) builder.add(t);
    return builder.finish();
}

} // namespace gapcheck
