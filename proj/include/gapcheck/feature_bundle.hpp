#pragma once

// Canonical morphosyntactic feature bundles: the FEATS column of
// CoNLL-U, held as key=value pairs sorted by key. The canonical
// serialization "Key=Val|Key=Val" (or "_" when empty) is used as the
// on-disk key in frequency databases, so parse/serialize must round-trip
// exactly.

#include <algorithm>
#include <compare>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gapcheck/errors.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

class FeatureBundle {
public:
    using Attr = std::pair<std::string, std::string>;

    FeatureBundle() = default;

    // Canonicalizes a raw FEATS string: "_" and "" mean the empty
    // bundle; otherwise |-separated Key=Value pairs in any order.
    // Fails on a pair without '=', an empty key, or a duplicate key.
    static bool try_parse(std::string_view raw, FeatureBundle& out, std::string* err = nullptr) {
        out.attrs_.clear();
        raw = text::trim(raw);
        if (raw.empty() || raw == "_") return true;
        for (std::string_view pair : text::split(raw, '|')) {
            std::size_t eq = pair.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                if (err) *err = "malformed feature pair '" + std::string(pair) + "'";
                return false;
            }
            out.attrs_.emplace_back(std::string(pair.substr(0, eq)), std::string(pair.substr(eq + 1)));
        }
        std::sort(out.attrs_.begin(), out.attrs_.end());
        for (std::size_t i = 1; i < out.attrs_.size(); ++i) {
            if (out.attrs_[i].first == out.attrs_[i - 1].first) {
                if (err) *err = "duplicate feature key '" + out.attrs_[i].first + "'";
                out.attrs_.clear();
                return false;
            }
        }
        return true;
    }

    static FeatureBundle parse(std::string_view raw) {
        FeatureBundle b;
        std::string err;
        if (!try_parse(raw, b, &err)) throw DataError("bad feature bundle: " + err);
        return b;
    }

    const std::vector<Attr>& attrs() const { return attrs_; }
    bool empty() const { return attrs_.empty(); }
    std::size_t size() const { return attrs_.size(); }

    std::string serialize() const {
        if (attrs_.empty()) return "_";
        std::string out;
        for (std::size_t i = 0; i < attrs_.size(); ++i) {
            if (i > 0) out.push_back('|');
            out += attrs_[i].first;
            out.push_back('=');
            out += attrs_[i].second;
        }
        return out;
    }

    bool contains(std::string_view key, std::string_view value) const {
        auto it = std::lower_bound(attrs_.begin(), attrs_.end(), key,
                                   [](const Attr& a, std::string_view k) { return a.first < k; });
        return it != attrs_.end() && it->first == key && it->second == value;
    }

    // Subset test: every pair of `sub` appears here. Both sides are
    // sorted, so a single merge scan suffices.
    bool contains_all(const FeatureBundle& sub) const {
        auto it = attrs_.begin();
        for (const Attr& want : sub.attrs_) {
            while (it != attrs_.end() && it->first < want.first) ++it;
            if (it == attrs_.end() || it->first != want.first || it->second != want.second) return false;
            ++it;
        }
        return true;
    }

    friend auto operator<=>(const FeatureBundle&, const FeatureBundle&) = default;

private:
    std::vector<Attr> attrs_;  // sorted by key, keys unique
};

// The FEATS canonicalization entry point used by the CoNLL-U reader.
inline FeatureBundle canonicalize_bundle(std::string_view raw) { return FeatureBundle::parse(raw); }

} // namespace gapcheck
