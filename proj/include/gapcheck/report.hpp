#pragma once

// Rendering of ValidationReport in the three output formats: a text
// table mirroring the headline band/divergence tables, machine TSV, and
// JSON. All percentages are one-decimal half-up; the attestation line in
// the table uses whole percent, matching the usual presentation
// ("1,050 lemmata (88%) are attested").

#include <cstdio>
#include <string>

#include "json.hpp"

#include "gapcheck/gapspec.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

inline std::string attestation_line(const ValidationReport& r) {
    double whole = std::floor(r.attestation_rate() + 0.5);
    return std::to_string(r.attested_lemmata) + " of " + std::to_string(r.total_lemmata) +
           " lemmata attested (" + text::fmt_fixed(whole, 0) + "%)";
}

inline std::string render_report_table(const ValidationReport& r) {
    auto row = [](const std::string& label, std::uint64_t count, double pct) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "  %-34s %8llu %6.1f\n", label.c_str(),
                      static_cast<unsigned long long>(count), ValidationReport::round1(pct));
        return std::string(buf);
    };
    const Thresholds& th = r.thresholds;
    std::string out;
    out += "Attestation\n  " + attestation_line(r) + "\n\n";
    out += "Occurrences (" + std::to_string(r.attested_claims) + " attested claims)      count      %\n";
    out += row("Likely defective: <= " + std::to_string(th.defective_max),
               r.band_defective, r.pct_defective());
    out += row("On the edge: " + std::to_string(th.defective_max + 1) + " - " + std::to_string(th.edge_max),
               r.band_edge, r.pct_edge());
    out += row("Likely not defective: > " + std::to_string(th.edge_max),
               r.band_not_defective, r.pct_not_defective());
    out += "\nLog-odds ratio (" + std::to_string(r.attested_lemmata) + " attested lemmata)  count      %\n";
    out += row("> " + text::fmt_double(th.lor_large), r.lemmata_above_large, r.pct_above_large());
    out += row("> " + text::fmt_double(th.lor_moderate), r.lemmata_above_moderate, r.pct_above_moderate());
    return out;
}

inline std::string render_report_tsv(const ValidationReport& r) {
    auto pct = [](double v) { return text::fmt_fixed(ValidationReport::round1(v), 1); };
    std::string out = "#!gapcheck-report v1\n";
    out += "#!columns section\trow\tcount\tdenominator\tpercent\n";
    out += "attestation\tattested_lemmata\t" + std::to_string(r.attested_lemmata) + "\t" +
           std::to_string(r.total_lemmata) + "\t" + pct(r.attestation_rate()) + "\n";
    out += "band\tlikely_defective\t" + std::to_string(r.band_defective) + "\t" +
           std::to_string(r.attested_claims) + "\t" + pct(r.pct_defective()) + "\n";
    out += "band\ton_the_edge\t" + std::to_string(r.band_edge) + "\t" +
           std::to_string(r.attested_claims) + "\t" + pct(r.pct_edge()) + "\n";
    out += "band\tlikely_not_defective\t" + std::to_string(r.band_not_defective) + "\t" +
           std::to_string(r.attested_claims) + "\t" + pct(r.pct_not_defective()) + "\n";
    out += "divergence\tabove_" + text::fmt_double(r.thresholds.lor_large) + "\t" +
           std::to_string(r.lemmata_above_large) + "\t" + std::to_string(r.attested_lemmata) + "\t" +
           pct(r.pct_above_large()) + "\n";
    out += "divergence\tabove_" + text::fmt_double(r.thresholds.lor_moderate) + "\t" +
           std::to_string(r.lemmata_above_moderate) + "\t" + std::to_string(r.attested_lemmata) +
           "\t" + pct(r.pct_above_moderate()) + "\n";
    return out;
}

inline std::string render_report_json(const ValidationReport& r) {
    nlohmann::ordered_json j;
    j["attestation"] = {{"total_lemmata", r.total_lemmata},
                        {"attested_lemmata", r.attested_lemmata},
                        {"rate_percent", ValidationReport::round1(r.attestation_rate())}};
    j["bands"] = {{"denominator", r.attested_claims},
                  {"likely_defective",
                   {{"count", r.band_defective}, {"percent", ValidationReport::round1(r.pct_defective())}}},
                  {"on_the_edge",
                   {{"count", r.band_edge}, {"percent", ValidationReport::round1(r.pct_edge())}}},
                  {"likely_not_defective",
                   {{"count", r.band_not_defective},
                    {"percent", ValidationReport::round1(r.pct_not_defective())}}}};
    j["divergence"] = {{"denominator", r.attested_lemmata},
                       {"large_threshold", r.thresholds.lor_large},
                       {"moderate_threshold", r.thresholds.lor_moderate},
                       {"above_large",
                        {{"count", r.lemmata_above_large},
                         {"percent", ValidationReport::round1(r.pct_above_large())}}},
                       {"above_moderate",
                        {{"count", r.lemmata_above_moderate},
                         {"percent", ValidationReport::round1(r.pct_above_moderate())}}}};
    return j.dump(2) + "\n";
}

inline std::string render_report(const ValidationReport& r, std::string_view format) {
    if (format == "table") return render_report_table(r);
    if (format == "tsv") return render_report_tsv(r);
    if (format == "json") return render_report_json(r);
    throw ConfigError("unknown report format '" + std::string(format) + "' (expected table/tsv/json)");
}

} // namespace gapcheck
