#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "gapcheck/stats.hpp"
#include "support/corpus_gen.hpp"
#include "support/oracle.hpp"

using namespace gapcheck;

namespace {

AnnotatedToken tok(const std::string& lemma, const std::string& upos, const std::string& feats) {
    return AnnotatedToken{lemma + "x", lemma, upos, FeatureBundle::parse(feats)};
}

// db with N=100, and for lemma "verbum" pattern Voice=Pass: n_w=5, n_l=10, n_f=20.
FrequencyDatabase hand_db() {
    std::vector<AnnotatedToken> tokens;
    for (int i = 0; i < 5; ++i) tokens.push_back(tok("verbum", "VERB", "Voice=Pass"));
    for (int i = 0; i < 5; ++i) tokens.push_back(tok("verbum", "VERB", "Voice=Act"));
    for (int i = 0; i < 15; ++i) tokens.push_back(tok("aliud", "VERB", "Voice=Pass"));
    for (int i = 0; i < 75; ++i) tokens.push_back(tok("aliud", "VERB", "Voice=Act"));
    return build_database(tokens, "la");
}

FeaturePattern passive() {
    FeaturePattern p;
    p.feats = FeatureBundle::parse("Voice=Pass");
    return p;
}

} // namespace

TEST_CASE("MLE probabilities are exact count ratios", "[stats]") {
    FrequencyDatabase db = hand_db();
    ProbabilityTriple t = mle_probs(db, "verbum", passive());
    CHECK(t.n_w == 5);
    CHECK(t.n_l == 10);
    CHECK(t.n_f == 20);
    CHECK(t.total == 100);
    CHECK(t.p_w == 0.05);
    CHECK(t.p_l == 0.10);
    CHECK(t.p_f == 0.20);
    CHECK(t.p_w <= t.p_l);
    CHECK(t.p_w <= t.p_f);
}

TEST_CASE("vacuous pattern gives p_f = 1 and p_w = p_l, so L = 0", "[stats]") {
    FrequencyDatabase db = hand_db();
    ProbabilityTriple t = mle_probs(db, "verbum", FeaturePattern{});
    CHECK(t.p_f == 1.0);
    CHECK(t.p_w == t.p_l);
    LogOddsResult r = log_odds(t);
    REQUIRE_FALSE(r.is_unattested());
    CHECK(std::abs(r.value()) < 1e-12);
}

TEST_CASE("unattested lemma or empty database raise not-attested errors", "[stats]") {
    FrequencyDatabase db = hand_db();
    CHECK_THROWS_AS(mle_probs(db, "astrifico", passive()), NotAttestedError);
    FrequencyDatabase empty = build_database({}, "la");
    CHECK_THROWS_AS(mle_probs(empty, "verbum", passive()), NotAttestedError);
}

TEST_CASE("log-odds of the worked example is ln 2.5", "[stats]") {
    FrequencyDatabase db = hand_db();
    LogOddsResult r = log_odds(mle_probs(db, "verbum", passive()));
    REQUIRE_FALSE(r.is_unattested());
    // 0.05 / (0.10 * 0.20) = 2.5
    CHECK(r.value() == Catch::Approx(0.916290731874155).margin(1e-12));
}

TEST_CASE("n_w = 0 yields the Unattested sentinel, never -inf", "[stats]") {
    FrequencyDatabase db = hand_db();
    FeaturePattern imp;
    imp.feats = FeatureBundle::parse("Mood=Imp");
    ProbabilityTriple t = mle_probs(db, "verbum", imp);
    CHECK(t.n_w == 0);
    CHECK(log_odds(t).is_unattested());
    CHECK(classify_divergence(log_odds(t)) == DivergenceClass::Unattested);
}

TEST_CASE("add-alpha smoothing is finite at n_w = 0 and converges to raw", "[stats]") {
    FrequencyDatabase db = hand_db();
    FeaturePattern imp;
    imp.feats = FeatureBundle::parse("Mood=Imp");
    ProbabilityTriple zero = mle_probs(db, "verbum", imp);
    LogOddsResult smoothed = log_odds_smoothed(zero, 0.5);
    CHECK_FALSE(smoothed.is_unattested());
    CHECK(std::isfinite(smoothed.value()));

    ProbabilityTriple t = mle_probs(db, "verbum", passive());
    double raw = log_odds(t).value();
    CHECK(log_odds_smoothed(t, 1e-9).value() == Catch::Approx(raw).margin(1e-6));

    CHECK_THROWS_AS(log_odds_smoothed(t, 0.0), ConfigError);
    CHECK_THROWS_AS(log_odds_smoothed(t, -1.0), ConfigError);
}

TEST_CASE("attestation bands partition counts at the default boundaries", "[stats]") {
    CHECK(classify_attestation(0) == AttestationBand::LikelyDefective);
    CHECK(classify_attestation(3) == AttestationBand::LikelyDefective);
    CHECK(classify_attestation(10) == AttestationBand::LikelyDefective);
    CHECK(classify_attestation(11) == AttestationBand::OnTheEdge);
    CHECK(classify_attestation(100) == AttestationBand::OnTheEdge);
    CHECK(classify_attestation(101) == AttestationBand::LikelyNotDefective);
    CHECK(classify_attestation(846) == AttestationBand::LikelyNotDefective);

    Thresholds bad;
    bad.defective_max = 100;
    bad.edge_max = 100;
    CHECK_THROWS_AS(classify_attestation(1, bad), ConfigError);

    Thresholds shifted;
    shifted.defective_max = 5;
    CHECK(classify_attestation(6, shifted) == AttestationBand::OnTheEdge);
}

TEST_CASE("divergence classes use strictly-greater boundaries", "[stats]") {
    auto cls = [](double v) { return classify_divergence(LogOddsResult::of(v)); };
    CHECK(cls(2.0) == DivergenceClass::Large);
    CHECK(cls(1.91) == DivergenceClass::Large);
    CHECK(cls(1.9) == DivergenceClass::Moderate);
    CHECK(cls(1.7) == DivergenceClass::Moderate);
    CHECK(cls(1.5) == DivergenceClass::Small);
    CHECK(cls(1.0) == DivergenceClass::Small);
    CHECK(cls(-3.0) == DivergenceClass::Small);

    Thresholds bad;
    bad.lor_large = 1.5;
    bad.lor_moderate = 1.5;
    CHECK_THROWS_AS(classify_divergence(LogOddsResult::of(1.0), bad), ConfigError);
}

TEST_CASE("every band has exactly one home and boundaries flip", "[stats][property]") {
    Thresholds th;
    for (std::uint64_t c = 0; c <= 200; ++c) {
        int homes = 0;
        AttestationBand b = classify_attestation(c, th);
        homes += (b == AttestationBand::LikelyDefective);
        homes += (b == AttestationBand::OnTheEdge);
        homes += (b == AttestationBand::LikelyNotDefective);
        CHECK(homes == 1);
    }
    CHECK(classify_attestation(th.defective_max) != classify_attestation(th.defective_max + 1));
    CHECK(classify_attestation(th.edge_max) != classify_attestation(th.edge_max + 1));
}

TEST_CASE("log-odds is monotone in n_w with the other counts fixed", "[stats][property]") {
    double prev = -1e300;
    for (std::uint64_t n_w = 1; n_w <= 50; ++n_w) {
        ProbabilityTriple t;
        t.n_w = n_w;
        t.n_l = 50;
        t.n_f = 80;
        t.total = 1000;
        t.p_w = double(t.n_w) / double(t.total);
        t.p_l = double(t.n_l) / double(t.total);
        t.p_f = double(t.n_f) / double(t.total);
        double v = log_odds(t).value();
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("log-odds bound: L <= -ln(max(p_l, p_f))", "[stats][property]") {
    std::mt19937_64 rng(3);
    auto corpus = testgen::generate(rng, 600, 25);
    std::vector<AnnotatedToken> tokens;
    for (const auto& t : corpus.tokens) tokens.push_back({t.form, t.lemma, t.upos, FeatureBundle::parse(t.feats)});
    FrequencyDatabase db = build_database(tokens, "la");

    for (const DbEntry& e : db.entries()) {
        FeaturePattern exact;
        exact.upos = e.upos;
        exact.feats = e.bundle;
        ProbabilityTriple t = mle_probs(db, e.lemma, exact);
        LogOddsResult r = log_odds(t);
        if (r.is_unattested()) continue;
        CHECK(r.value() <= -std::log(std::max(t.p_l, t.p_f)) + 1e-9);
    }
}

TEST_CASE("pipeline log-odds equals oracle recomputation within 1e-12", "[stats][oracle]") {
    std::mt19937_64 rng(77);
    auto corpus = testgen::generate(rng, 800, 40);
    std::vector<AnnotatedToken> tokens;
    for (const auto& t : corpus.tokens) tokens.push_back({t.form, t.lemma, t.upos, FeatureBundle::parse(t.feats)});
    FrequencyDatabase db = build_database(tokens, "la");
    oracle::Tally tal = oracle::tally(corpus.tokens, true, {});

    for (const auto& [key, count] : tal.pairs) {
        const auto& [lemma, upos, feats] = key;
        FeaturePattern exact;
        exact.upos = upos;
        exact.feats = FeatureBundle::parse(feats);
        ProbabilityTriple t = mle_probs(db, lemma, exact);
        double expect = oracle::log_odds(oracle::count_pair(tal, lemma, upos, feats),
                                         tal.lemmas.at(lemma),
                                         oracle::count_marginal(tal, upos, feats), tal.total);
        CHECK(log_odds(t).value() == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("scale invariance: k-fold duplication leaves L unchanged", "[stats][property]") {
    std::mt19937_64 rng(11);
    auto corpus = testgen::generate(rng, 200, 15);
    std::vector<AnnotatedToken> tokens;
    for (const auto& t : corpus.tokens) tokens.push_back({t.form, t.lemma, t.upos, FeatureBundle::parse(t.feats)});
    FrequencyDatabase base = build_database(tokens, "la");

    for (int k : {2, 7, 100}) {
        std::vector<AnnotatedToken> dup;
        for (int i = 0; i < k; ++i) dup.insert(dup.end(), tokens.begin(), tokens.end());
        FrequencyDatabase scaled = build_database(dup, "la");
        for (const DbEntry& e : base.entries()) {
            FeaturePattern exact;
            exact.upos = e.upos;
            exact.feats = e.bundle;
            double l0 = log_odds(mle_probs(base, e.lemma, exact)).value();
            double l1 = log_odds(mle_probs(scaled, e.lemma, exact)).value();
            CHECK(l1 == Catch::Approx(l0).margin(1e-12));
        }
    }
}
