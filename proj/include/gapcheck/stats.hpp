#pragma once

// The two indirect-negative-evidence signals: absolute attestation
// frequency (three bands) and log-odds divergence of a cell's observed
// probability from its independence expectation p_l * p_f.
//
// All probabilities are raw maximum-likelihood ratios over the database
// total N; no smoothing. An unattested cell (n_w = 0) yields the
// Unattested sentinel, never -inf or an add-one estimate. Logs are
// natural: the 1.9 / 1.5 divergence thresholds are stated on that scale.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "gapcheck/errors.hpp"
#include "gapcheck/freqdb.hpp"
#include "gapcheck/pattern.hpp"

namespace gapcheck {

struct Thresholds {
    std::uint64_t defective_max = 10;  // band: <= this is Likely Defective
    std::uint64_t edge_max = 100;      // band: <= this (and > defective_max) is On the Edge
    double lor_large = 1.9;            // divergence: strictly greater is Large
    double lor_moderate = 1.5;         // divergence: strictly greater is Moderate

    void check_bands() const {
        if (defective_max >= edge_max)
            throw ConfigError("band thresholds must satisfy defective_max < edge_max (got " +
                              std::to_string(defective_max) + " >= " + std::to_string(edge_max) + ")");
    }
    void check_divergence() const {
        if (!(lor_large > lor_moderate))
            throw ConfigError("divergence thresholds must satisfy large > moderate");
    }
};

struct ProbabilityTriple {
    double p_w = 0.0, p_l = 0.0, p_f = 0.0;
    std::uint64_t n_w = 0, n_l = 0, n_f = 0, total = 0;
};

// A log-odds value, or the Unattested sentinel when n_w = 0.
class LogOddsResult {
public:
    static LogOddsResult unattested() { return LogOddsResult(); }
    static LogOddsResult of(double v) {
        LogOddsResult r;
        r.value_ = v;
        return r;
    }

    bool is_unattested() const { return !value_.has_value(); }
    double value() const {
        if (!value_) throw Error("log-odds value requested for an unattested cell");
        return *value_;
    }
    const std::optional<double>& maybe() const { return value_; }

    friend bool operator==(const LogOddsResult&, const LogOddsResult&) = default;

private:
    std::optional<double> value_;
};

enum class AttestationBand { LikelyDefective, OnTheEdge, LikelyNotDefective };
enum class DivergenceClass { Large, Moderate, Small, Unattested };

// MLE probabilities for one gap claim. Callers must gate on lemma
// attestation: an unattested lemma has no defined p_w / p_l and is
// excluded from analysis upstream.
inline ProbabilityTriple mle_probs(const FrequencyDatabase& db, std::string_view lemma,
                                   const FeaturePattern& pattern) {
    ProbabilityTriple t;
    t.total = db.total();
    if (t.total == 0) throw NotAttestedError("empty database (N = 0)");
    t.n_l = db.count_lemma(lemma);
    if (t.n_l == 0) throw NotAttestedError("lemma '" + std::string(lemma) + "' is not attested");
    t.n_w = db.count_pair(lemma, pattern);
    t.n_f = db.count_marginal(pattern);
    double n = static_cast<double>(t.total);
    t.p_w = static_cast<double>(t.n_w) / n;
    t.p_l = static_cast<double>(t.n_l) / n;
    t.p_f = static_cast<double>(t.n_f) / n;
    return t;
}

// L_w = log(p_w / (p_l * p_f)), computed as a difference of logs so the
// tiny probabilities of billion-token corpora stay well-conditioned.
inline LogOddsResult log_odds(const ProbabilityTriple& t) {
    if (t.n_w == 0) return LogOddsResult::unattested();
    return LogOddsResult::of(std::log(t.p_w) - std::log(t.p_l) - std::log(t.p_f));
}

// Add-alpha variant for exploration only: finite even at n_w = 0. The
// headline classification always uses the raw estimate above.
inline LogOddsResult log_odds_smoothed(const ProbabilityTriple& t, double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("smoothing alpha must be > 0");
    double n = static_cast<double>(t.total) + alpha;
    return LogOddsResult::of(std::log((static_cast<double>(t.n_w) + alpha) / n) -
                             std::log((static_cast<double>(t.n_l) + alpha) / n) -
                             std::log((static_cast<double>(t.n_f) + alpha) / n));
}

// Band partition of the non-negative integers:
// [0, defective_max] / (defective_max, edge_max] / (edge_max, inf).
inline AttestationBand classify_attestation(std::uint64_t count, const Thresholds& th = {}) {
    th.check_bands();
    if (count <= th.defective_max) return AttestationBand::LikelyDefective;
    if (count <= th.edge_max) return AttestationBand::OnTheEdge;
    return AttestationBand::LikelyNotDefective;
}

// Strictly-greater boundary semantics on both divergence thresholds.
inline DivergenceClass classify_divergence(const LogOddsResult& r, const Thresholds& th = {}) {
    th.check_divergence();
    if (r.is_unattested()) return DivergenceClass::Unattested;
    if (r.value() > th.lor_large) return DivergenceClass::Large;
    if (r.value() > th.lor_moderate) return DivergenceClass::Moderate;
    return DivergenceClass::Small;
}

// ── Names (verdict TSV vocabulary) ───────────────────────────────────

inline std::string_view to_string(AttestationBand b) {
    switch (b) {
    case AttestationBand::LikelyDefective: return "LikelyDefective";
    case AttestationBand::OnTheEdge: return "OnTheEdge";
    case AttestationBand::LikelyNotDefective: return "LikelyNotDefective";
    }
    return "?";
}

inline std::string_view to_string(DivergenceClass c) {
    switch (c) {
    case DivergenceClass::Large: return "Large";
    case DivergenceClass::Moderate: return "Moderate";
    case DivergenceClass::Small: return "Small";
    case DivergenceClass::Unattested: return "Unattested";
    }
    return "?";
}

inline AttestationBand band_from_string(std::string_view s) {
    if (s == "LikelyDefective") return AttestationBand::LikelyDefective;
    if (s == "OnTheEdge") return AttestationBand::OnTheEdge;
    if (s == "LikelyNotDefective") return AttestationBand::LikelyNotDefective;
    throw DataError("unknown attestation band '" + std::string(s) + "'");
}

inline DivergenceClass divergence_from_string(std::string_view s) {
    if (s == "Large") return DivergenceClass::Large;
    if (s == "Moderate") return DivergenceClass::Moderate;
    if (s == "Small") return DivergenceClass::Small;
    if (s == "Unattested") return DivergenceClass::Unattested;
    throw DataError("unknown divergence class '" + std::string(s) + "'");
}

} // namespace gapcheck
