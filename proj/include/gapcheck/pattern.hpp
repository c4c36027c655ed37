#pragma once

// Feature patterns describe gap claims: an optional UPOS constraint plus
// a partial feature bundle whose pairs must all be present in a counted
// cell. Subset semantics, since Wiktionary-style claims ("no passive")
// name one or two features of many.
//
// Text form: "UPOS:FEATS" with "*" for any UPOS, e.g. "VERB:Voice=Pass",
// "*:_" (vacuous, matches every cell), "VERB:_" (UPOS only). A bare
// feats string without ':' is accepted on input.

#include <compare>
#include <optional>
#include <string>
#include <string_view>

#include "gapcheck/errors.hpp"
#include "gapcheck/feature_bundle.hpp"

namespace gapcheck {

struct FeaturePattern {
    std::optional<std::string> upos;  // absent = any UPOS
    FeatureBundle feats;              // canonical, possibly empty

    bool vacuous() const { return !upos && feats.empty(); }

    bool matches(std::string_view token_upos, const FeatureBundle& bundle) const {
        if (upos && *upos != token_upos) return false;
        return bundle.contains_all(feats);
    }

    std::string serialize() const {
        std::string out = upos ? *upos : std::string("*");
        out.push_back(':');
        out += feats.serialize();
        return out;
    }

    static FeaturePattern parse(std::string_view s) {
        FeaturePattern p;
        std::size_t colon = s.find(':');
        if (colon == std::string_view::npos) {
            p.feats = FeatureBundle::parse(s);
            return p;
        }
        std::string_view upos = text::trim(s.substr(0, colon));
        if (!upos.empty() && upos != "*") p.upos = std::string(upos);
        p.feats = FeatureBundle::parse(s.substr(colon + 1));
        return p;
    }

    friend auto operator<=>(const FeaturePattern&, const FeaturePattern&) = default;
};

inline bool matches(const FeaturePattern& pattern, std::string_view upos, const FeatureBundle& bundle) {
    return pattern.matches(upos, bundle);
}

} // namespace gapcheck
