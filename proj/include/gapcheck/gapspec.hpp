#pragma once

// Gap claims and their verdicts. A GapSpec says "this lemma lacks cells
// matching these patterns" (typically sourced from Wiktionary); validate
// turns each claim into attestation counts, a frequency band and a
// log-odds divergence against a frequency database.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gapcheck/errors.hpp"
#include "gapcheck/freqdb.hpp"
#include "gapcheck/pattern.hpp"
#include "gapcheck/stats.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

struct GapSpec {
    std::string language;
    std::string lemma;  // raw, as claimed; normalized at validation time
    std::vector<FeaturePattern> patterns;
    std::string source;
    std::string note;
};

struct Verdict {
    std::string lemma;                       // normalized form
    std::optional<FeaturePattern> pattern;   // absent for a lemma-level NotAttested verdict
    bool attested = false;                   // lemma-level: n_l >= 1
    std::uint64_t n_w = 0, n_l = 0, n_f = 0, total = 0;
    std::optional<AttestationBand> band;     // absent iff !attested
    LogOddsResult log_odds;
    DivergenceClass divergence = DivergenceClass::Unattested;
};

// ── Validation ───────────────────────────────────────────────────────

inline std::vector<Verdict> validate(const FrequencyDatabase& db, const GapSpec& spec,
                                     const Thresholds& th = {}) {
    th.check_bands();
    th.check_divergence();
    if (spec.language != db.language())
        throw DataError("gap spec for '" + spec.lemma + "' is " + spec.language +
                        " but database is " + db.language());
    if (spec.patterns.empty())
        throw DataError("gap spec for '" + spec.lemma + "' has no patterns");

    std::string lemma = db.options().normalize_lemma(spec.lemma);
    std::vector<Verdict> out;

    if (db.count_lemma(lemma) == 0) {
        // No inflected form of the lemma appears at all: one verdict
        // covering every pattern, no statistics.
        Verdict v;
        v.lemma = lemma;
        v.attested = false;
        v.total = db.total();
        v.log_odds = LogOddsResult::unattested();
        v.divergence = DivergenceClass::Unattested;
        out.push_back(std::move(v));
        return out;
    }

    for (const FeaturePattern& pattern : spec.patterns) {
        ProbabilityTriple t = mle_probs(db, lemma, pattern);
        Verdict v;
        v.lemma = lemma;
        v.pattern = pattern;
        v.attested = true;
        v.n_w = t.n_w;
        v.n_l = t.n_l;
        v.n_f = t.n_f;
        v.total = t.total;
        v.band = classify_attestation(t.n_w, th);
        v.log_odds = log_odds(t);
        v.divergence = classify_divergence(v.log_odds, th);
        out.push_back(std::move(v));
    }
    return out;
}

inline std::string verdict_sort_key(const Verdict& v) {
    return v.lemma + "\t" + (v.pattern ? v.pattern->serialize() : std::string("-"));
}

// Validates every spec and returns verdicts in a stable order
// independent of spec-list order. Exact duplicate claims collapse.
inline std::vector<Verdict> validate_all(const FrequencyDatabase& db,
                                         const std::vector<GapSpec>& specs,
                                         const Thresholds& th = {}) {
    std::vector<Verdict> out;
    for (const GapSpec& spec : specs) {
        std::vector<Verdict> vs = validate(db, spec, th);
        out.insert(out.end(), vs.begin(), vs.end());
    }
    std::sort(out.begin(), out.end(), [](const Verdict& a, const Verdict& b) {
        return verdict_sort_key(a) < verdict_sort_key(b);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Verdict& a, const Verdict& b) {
                              return verdict_sort_key(a) == verdict_sort_key(b);
                          }),
              out.end());
    return out;
}

// ── Report ───────────────────────────────────────────────────────────

// Aggregates in the shape of the two headline tables: attestation rate
// over lemmata, band shares over attested claims, and cumulative
// divergence-threshold shares with per-lemma aggregation by max L (the
// strongest evidence of use a lemma shows).
struct ValidationReport {
    std::uint64_t total_lemmata = 0;
    std::uint64_t attested_lemmata = 0;
    std::uint64_t attested_claims = 0;
    std::uint64_t band_defective = 0;
    std::uint64_t band_edge = 0;
    std::uint64_t band_not_defective = 0;
    std::uint64_t lemmata_above_large = 0;     // max L > lor_large
    std::uint64_t lemmata_above_moderate = 0;  // max L > lor_moderate (cumulative)
    Thresholds thresholds;

    static double pct(std::uint64_t part, std::uint64_t whole) {
        return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
    }
    // One decimal, half-up: the rounding the headline tables use.
    static double round1(double v) { return std::floor(v * 10.0 + 0.5) / 10.0; }

    double attestation_rate() const { return pct(attested_lemmata, total_lemmata); }
    double pct_defective() const { return pct(band_defective, attested_claims); }
    double pct_edge() const { return pct(band_edge, attested_claims); }
    double pct_not_defective() const { return pct(band_not_defective, attested_claims); }
    double pct_above_large() const { return pct(lemmata_above_large, attested_lemmata); }
    double pct_above_moderate() const { return pct(lemmata_above_moderate, attested_lemmata); }
};

inline ValidationReport summarize(const std::vector<Verdict>& verdicts, const Thresholds& th = {}) {
    if (verdicts.empty()) throw DataError("cannot summarize an empty verdict set");
    th.check_divergence();

    ValidationReport report;
    report.thresholds = th;

    std::map<std::string, bool> lemma_attested;
    std::map<std::string, std::optional<double>> lemma_max_l;
    for (const Verdict& v : verdicts) {
        lemma_attested[v.lemma] = lemma_attested[v.lemma] || v.attested;
        if (!v.attested) continue;
        ++report.attested_claims;
        if (v.band) {
            switch (*v.band) {
            case AttestationBand::LikelyDefective: ++report.band_defective; break;
            case AttestationBand::OnTheEdge: ++report.band_edge; break;
            case AttestationBand::LikelyNotDefective: ++report.band_not_defective; break;
            }
        }
        if (!v.log_odds.is_unattested()) {
            auto& best = lemma_max_l[v.lemma];
            if (!best || v.log_odds.value() > *best) best = v.log_odds.value();
        }
    }

    report.total_lemmata = lemma_attested.size();
    for (const auto& [lemma, attested] : lemma_attested)
        if (attested) ++report.attested_lemmata;
    for (const auto& [lemma, max_l] : lemma_max_l) {
        if (!max_l) continue;
        if (*max_l > th.lor_large) ++report.lemmata_above_large;
        if (*max_l > th.lor_moderate) ++report.lemmata_above_moderate;
    }
    return report;
}

// ── Gap-spec JSON files ──────────────────────────────────────────────

namespace detail {

inline DataError spec_error(std::size_t index, const std::string& lemma, const std::string& msg) {
    std::string where = "gap spec entry #" + std::to_string(index);
    if (!lemma.empty()) where += " (lemma '" + lemma + "')";
    return DataError(where + ": " + msg);
}

inline FeaturePattern pattern_from_json(const nlohmann::ordered_json& j, std::size_t index,
                                        const std::string& lemma) {
    if (!j.is_object()) throw spec_error(index, lemma, "pattern must be an object");
    FeaturePattern p;
    FeatureBundle::Attr attr;
    std::vector<FeatureBundle::Attr> attrs;
    for (const auto& [key, value] : j.items()) {
        if (key == "upos") {
            if (!value.is_string() || value.get<std::string>().empty())
                throw spec_error(index, lemma, "pattern upos must be a non-empty string");
            p.upos = value.get<std::string>();
        } else if (key == "feats") {
            if (!value.is_object()) throw spec_error(index, lemma, "pattern feats must be an object");
            std::string feats;
            for (const auto& [fk, fv] : value.items()) {
                if (!fv.is_string() || fk.empty() || fv.get<std::string>().empty())
                    throw spec_error(index, lemma, "feature values must be non-empty strings");
                if (!feats.empty()) feats += "|";
                feats += fk + "=" + fv.get<std::string>();
            }
            p.feats = FeatureBundle::parse(feats);
        } else if (key == "form") {
            throw spec_error(index, lemma,
                             "claim names a missing surface form ('form'); the cell-based model "
                             "cannot represent surface-form claims; rejected, not approximated");
        } else {
            throw spec_error(index, lemma, "unknown pattern key '" + key + "'");
        }
    }
    return p;
}

} // namespace detail

inline std::vector<GapSpec> parse_gapspecs_json(const std::string& body,
                                                const std::string& source = "<gapspecs>") {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(source + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw DataError(source + ": expected a JSON array of gap specs");

    std::vector<GapSpec> specs;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& entry = doc[i];
        if (!entry.is_object()) throw detail::spec_error(i, "", "entry must be an object");
        GapSpec spec;
        if (entry.contains("lemma") && entry["lemma"].is_string()) spec.lemma = entry["lemma"];
        for (const auto& [key, value] : entry.items()) {
            if (key == "language") {
                if (!value.is_string() || value.get<std::string>().empty())
                    throw detail::spec_error(i, spec.lemma, "language must be a non-empty string");
                spec.language = value.get<std::string>();
            } else if (key == "lemma") {
                if (!value.is_string() || value.get<std::string>().empty())
                    throw detail::spec_error(i, spec.lemma, "lemma must be a non-empty string");
            } else if (key == "patterns") {
                if (!value.is_array() || value.empty())
                    throw detail::spec_error(i, spec.lemma, "patterns must be a non-empty array");
                for (const auto& pj : value)
                    spec.patterns.push_back(detail::pattern_from_json(pj, i, spec.lemma));
            } else if (key == "source") {
                if (value.is_string()) spec.source = value.get<std::string>();
            } else if (key == "note") {
                if (value.is_string()) spec.note = value.get<std::string>();
            } else if (key == "form") {
                throw detail::spec_error(i, spec.lemma,
                                         "claim names a missing surface form ('form'); rejected: "
                                         "cell-based validation cannot represent it");
            } else {
                throw detail::spec_error(i, spec.lemma, "unknown key '" + key + "'");
            }
        }
        if (spec.language.empty()) throw detail::spec_error(i, spec.lemma, "missing language");
        if (spec.lemma.empty()) throw detail::spec_error(i, spec.lemma, "missing lemma");
        if (spec.patterns.empty()) throw detail::spec_error(i, spec.lemma, "missing patterns");
        specs.push_back(std::move(spec));
    }
    return specs;
}

inline std::string serialize_gapspecs_json(const std::vector<GapSpec>& specs) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const GapSpec& spec : specs) {
        nlohmann::ordered_json entry;
        entry["language"] = spec.language;
        entry["lemma"] = spec.lemma;
        entry["patterns"] = nlohmann::ordered_json::array();
        for (const FeaturePattern& p : spec.patterns) {
            nlohmann::ordered_json pj;
            if (p.upos) pj["upos"] = *p.upos;
            nlohmann::ordered_json feats = nlohmann::ordered_json::object();
            for (const auto& [key, value] : p.feats.attrs()) feats[key] = value;
            pj["feats"] = std::move(feats);
            entry["patterns"].push_back(std::move(pj));
        }
        if (!spec.source.empty()) entry["source"] = spec.source;
        if (!spec.note.empty()) entry["note"] = spec.note;
        doc.push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

// ── Verdict TSV ──────────────────────────────────────────────────────

inline constexpr std::string_view kVerdictFormatLine = "#!gapcheck-verdicts v1";
inline constexpr std::string_view kVerdictColumns =
    "lemma\tpattern\tattested\tn_w\tn_l\tn_f\tN\tband\tlog_odds\tdivergence";

inline std::string encode_thresholds(const Thresholds& th) {
    return "defective_max=" + std::to_string(th.defective_max) +
           ";edge_max=" + std::to_string(th.edge_max) +
           ";lor_large=" + text::fmt_double(th.lor_large) +
           ";lor_moderate=" + text::fmt_double(th.lor_moderate);
}

inline Thresholds decode_thresholds(std::string_view encoded) {
    Thresholds th;
    for (std::string_view field : text::split(encoded, ';')) {
        std::size_t eq = field.find('=');
        if (eq == std::string_view::npos) throw DataError("bad thresholds field '" + std::string(field) + "'");
        std::string_view key = field.substr(0, eq), val = field.substr(eq + 1);
        bool ok = true;
        if (key == "defective_max") ok = text::parse_u64(val, th.defective_max);
        else if (key == "edge_max") ok = text::parse_u64(val, th.edge_max);
        else if (key == "lor_large") ok = text::parse_double(val, th.lor_large);
        else if (key == "lor_moderate") ok = text::parse_double(val, th.lor_moderate);
        else throw DataError("unknown thresholds key '" + std::string(key) + "'");
        if (!ok) throw DataError("bad thresholds value '" + std::string(val) + "'");
    }
    return th;
}

inline void write_verdicts_tsv(std::ostream& out, const std::vector<Verdict>& verdicts,
                               const std::string& language, const Thresholds& th) {
    out << kVerdictFormatLine << '\n';
    out << "#!language " << language << '\n';
    out << "#!thresholds " << encode_thresholds(th) << '\n';
    out << "#!columns " << kVerdictColumns << '\n';
    for (const Verdict& v : verdicts) {
        out << v.lemma << '\t' << (v.pattern ? v.pattern->serialize() : std::string("-")) << '\t'
            << (v.attested ? "true" : "false") << '\t' << v.n_w << '\t' << v.n_l << '\t' << v.n_f
            << '\t' << v.total << '\t' << (v.band ? to_string(*v.band) : std::string_view("NotAttested"))
            << '\t' << (v.log_odds.is_unattested() ? std::string() : text::fmt_double(v.log_odds.value()))
            << '\t' << to_string(v.divergence) << '\n';
    }
    if (!out) throw DataError("write failure while saving verdicts");
}

struct VerdictFile {
    std::string language;
    Thresholds thresholds;
    std::vector<Verdict> verdicts;
};

inline VerdictFile read_verdicts_tsv(std::istream& in, const std::string& source = "<verdicts>") {
    VerdictFile file;
    std::string line;
    std::uint64_t lineno = 0;
    auto bad = [&](const std::string& msg) -> DataError {
        return DataError(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    auto next = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++lineno;
        return true;
    };

    if (!next() || line != kVerdictFormatLine) throw bad("not a gapcheck verdict file");
    if (!next() || !line.starts_with("#!language ")) throw bad("missing #!language header");
    file.language = line.substr(11);
    if (!next() || !line.starts_with("#!thresholds ")) throw bad("missing #!thresholds header");
    file.thresholds = decode_thresholds(line.substr(13));
    if (!next() || !line.starts_with("#!columns ") || std::string_view(line).substr(10) != kVerdictColumns)
        throw bad("missing or unexpected #!columns header");

    while (next()) {
        if (line.empty()) continue;
        auto fields = text::split(line, '\t');
        if (fields.size() != 10) throw bad("expected 10 tab-separated fields");
        Verdict v;
        v.lemma.assign(fields[0]);
        if (fields[1] != "-") v.pattern = FeaturePattern::parse(fields[1]);
        if (fields[2] == "true") v.attested = true;
        else if (fields[2] == "false") v.attested = false;
        else throw bad("bad attested flag '" + std::string(fields[2]) + "'");
        if (!text::parse_u64(fields[3], v.n_w) || !text::parse_u64(fields[4], v.n_l) ||
            !text::parse_u64(fields[5], v.n_f) || !text::parse_u64(fields[6], v.total))
            throw bad("bad count field");
        if (fields[7] != "NotAttested") v.band = band_from_string(fields[7]);
        if (!fields[8].empty()) {
            double L;
            if (!text::parse_double(fields[8], L)) throw bad("bad log_odds '" + std::string(fields[8]) + "'");
            v.log_odds = LogOddsResult::of(L);
        }
        v.divergence = divergence_from_string(fields[9]);
        if (!v.attested && v.band) throw bad("unattested verdict carries a band");
        file.verdicts.push_back(std::move(v));
    }
    return file;
}

} // namespace gapcheck
