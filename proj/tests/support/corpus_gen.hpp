#pragma once

// Random synthetic CoNLL-U corpora for property tests: emits both the
// raw token tuples (oracle input) and the serialized file text with
// comments, blank lines, multiword ranges, empty nodes and shuffled
// FEATS key order (parser input).

#include <random>
#include <string>
#include <vector>

#include "support/oracle.hpp"

namespace testgen {

struct Corpus {
    std::vector<oracle::RawToken> tokens;
    std::string conllu;
};

inline std::string pick(std::mt19937_64& rng, const std::vector<std::string>& v) {
    return v[rng() % v.size()];
}

inline Corpus generate(std::mt19937_64& rng, std::size_t n_tokens, std::size_t n_lemmata) {
    static const std::vector<std::string> upos_pool = {"VERB", "NOUN", "ADJ", "AUX", "ADV", "PUNCT"};
    static const std::vector<std::pair<std::string, std::vector<std::string>>> feat_pool = {
        {"Mood", {"Ind", "Sub", "Imp"}},   {"Number", {"Sing", "Plur"}},
        {"Person", {"1", "2", "3"}},       {"Tense", {"Pres", "Past", "Fut"}},
        {"Voice", {"Act", "Pass"}},        {"Case", {"Nom", "Acc", "Gen"}},
        {"VerbForm", {"Fin", "Inf", "Part"}}};

    Corpus out;
    out.tokens.reserve(n_tokens);
    int sent_id = 0, tok_id = 0;
    auto new_sentence = [&]() {
        if (tok_id > 0) out.conllu += "\n";
        out.conllu += "# sent_id = " + std::to_string(++sent_id) + "\n";
        tok_id = 0;
    };
    new_sentence();

    for (std::size_t i = 0; i < n_tokens; ++i) {
        if (tok_id >= 1 && rng() % 12 == 0) new_sentence();

        oracle::RawToken tok;
        std::size_t lemma_idx = rng() % n_lemmata;
        tok.lemma = "lemma" + std::to_string(lemma_idx);
        if (rng() % 5 == 0) tok.lemma[0] = 'L';  // exercise lowercasing
        tok.form = tok.lemma + "x";
        tok.upos = pick(rng, upos_pool);

        // Random bundle: subset of keys, values random, key order shuffled.
        std::vector<std::string> pairs;
        for (const auto& [key, values] : feat_pool)
            if (rng() % 3 == 0) pairs.push_back(key + "=" + pick(rng, values));
        for (std::size_t k = pairs.size(); k > 1; --k) std::swap(pairs[k - 1], pairs[rng() % k]);
        if (pairs.empty()) {
            tok.feats = "_";
        } else {
            for (std::size_t k = 0; k < pairs.size(); ++k) {
                if (k) tok.feats += "|";
                tok.feats += pairs[k];
            }
        }

        // Occasionally a multi-word range line before the token.
        if (rng() % 41 == 0) {
            out.conllu += std::to_string(tok_id + 1) + "-" + std::to_string(tok_id + 2) +
                          "\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n";
        }
        ++tok_id;
        out.conllu += std::to_string(tok_id) + "\t" + tok.form + "\t" + tok.lemma + "\t" + tok.upos +
                      "\t_\t" + tok.feats + "\t0\troot\t_\t_\n";
        if (rng() % 53 == 0) {
            out.conllu += std::to_string(tok_id) + "." + "1\tellip\t_\t_\t_\t_\t_\t_\t_\t_\n";
        }
        out.tokens.push_back(std::move(tok));
    }
    out.conllu += "\n";
    return out;
}

} // namespace testgen
