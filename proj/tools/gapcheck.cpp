// gapcheck: corpus statistics for validating claims of morphological
// defectivity. Subcommands:
//
//   count       build a frequency database from tagged CoNLL-U corpora
//   validate    check gap claims against a database, emit verdicts
//   report      aggregate verdicts into band/divergence tables
//   fetch-gaps  compile gap claims from Wiktionary (API, cache or dump)
//   probe       inspect a single (lemma, pattern) cell
//
// Data goes to files or stdout; progress and diagnostics to stderr.
// Exit codes: 0 ok, 2 usage, 3 data, 4 partial shards, 5 network.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gapcheck/conllu.hpp"
#include "gapcheck/errors.hpp"
#include "gapcheck/freqdb.hpp"
#include "gapcheck/fs.hpp"
#include "gapcheck/gapspec.hpp"
#include "gapcheck/http_transport.hpp"
#include "gapcheck/mediawiki.hpp"
#include "gapcheck/report.hpp"
#include "gapcheck/sharding.hpp"
#include "gapcheck/stats.hpp"
#include "gapcheck/wikidump.hpp"
#include "gapcheck/wikitext.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kPartial = 4;
constexpr int kNetwork = 5;

gapcheck::FrequencyDatabase load_db(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gapcheck::DataError("cannot open database '" + path + "'");
    return gapcheck::FrequencyDatabase::load(in, path);
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        gapcheck::fs::atomic_write_file(path, content);
    }
}

// ── count ────────────────────────────────────────────────────────────

struct CountArgs {
    std::vector<std::string> inputs;
    std::string out;
    std::string manifest;
    std::string language = "und";
    std::string exclude = "PUNCT,SYM,X";
    int shards = 1;
    int jobs = 0;
    bool strict = false;
    bool no_lowercase = false;
    bool allow_partial = false;
    std::vector<int> force_fail;
};

int run_count(const CountArgs& args) {
    gapcheck::CountJob job;
    job.inputs = args.inputs;
    job.out_path = args.out;
    job.manifest_path = args.manifest;
    job.language = args.language;
    job.shards = args.shards;
    job.jobs = args.jobs;
    job.mode = args.strict ? gapcheck::ParseMode::Strict : gapcheck::ParseMode::Lenient;
    job.allow_partial = args.allow_partial;
    job.force_fail = args.force_fail;
    job.options.lowercase_lemmas = !args.no_lowercase;
    if (!args.exclude.empty() && args.exclude != "none")
        for (auto tag : gapcheck::text::split(args.exclude, ','))
            job.options.exclude_upos.emplace_back(tag);

    gapcheck::CountOutcome outcome = gapcheck::run_sharded_count(job);

    const auto& d = outcome.diagnostics;
    std::cerr << "count: " << d.tokens << " tokens from " << job.inputs.size() << " file(s), "
              << job.shards << " shard(s)";
    if (d.malformed_lines || d.malformed_feats || d.invalid_utf8)
        std::cerr << " [malformed lines " << d.malformed_lines << ", bad feats " << d.malformed_feats
                  << ", utf8 repairs " << d.invalid_utf8 << "]";
    std::cerr << "\n";

    if (outcome.failed > 0) {
        std::cerr << "count: " << outcome.failed << " shard(s) failed:";
        for (int id : outcome.manifest.failed_ids()) std::cerr << " " << id;
        std::cerr << " (see manifest)\n";
        if (!job.allow_partial) {
            std::cerr << "count: no merged database written; re-run failed shards or pass "
                         "--allow-partial\n";
            return kPartial;
        }
        std::cerr << "count: merged database is PARTIAL; recorded in metadata\n";
    }
    if (outcome.merged_written)
        std::cerr << "count: wrote " << job.out_path << " (N=" << outcome.merged->total() << ")\n";
    return kOk;
}

// ── validate ─────────────────────────────────────────────────────────

struct ValidateArgs {
    std::string db;
    std::string gaps;
    std::string out;
    gapcheck::Thresholds thresholds;
};

int run_validate(const ValidateArgs& args) {
    args.thresholds.check_bands();
    args.thresholds.check_divergence();
    gapcheck::FrequencyDatabase db = load_db(args.db);
    auto specs = gapcheck::parse_gapspecs_json(gapcheck::fs::read_file(args.gaps), args.gaps);
    if (specs.empty()) std::cerr << "validate: warning: no gap specs in " << args.gaps << "\n";

    auto verdicts = gapcheck::validate_all(db, specs, args.thresholds);
    std::ostringstream out;
    gapcheck::write_verdicts_tsv(out, verdicts, db.language(), args.thresholds);
    write_output(args.out, out.str());
    std::cerr << "validate: " << verdicts.size() << " verdict(s) for " << specs.size()
              << " spec(s)\n";
    return kOk;
}

// ── report ───────────────────────────────────────────────────────────

struct ReportArgs {
    std::string verdicts;
    std::string out;
    std::string format = "table";
    std::optional<double> lor_large, lor_moderate;
};

int run_report(const ReportArgs& args) {
    std::ifstream in(args.verdicts, std::ios::binary);
    if (!in) throw gapcheck::DataError("cannot open verdicts '" + args.verdicts + "'");
    gapcheck::VerdictFile file = gapcheck::read_verdicts_tsv(in, args.verdicts);
    gapcheck::Thresholds th = file.thresholds;  // as used at validation time
    if (args.lor_large) th.lor_large = *args.lor_large;
    if (args.lor_moderate) th.lor_moderate = *args.lor_moderate;
    gapcheck::ValidationReport report = gapcheck::summarize(file.verdicts, th);
    write_output(args.out, gapcheck::render_report(report, args.format));
    return kOk;
}

// ── probe ────────────────────────────────────────────────────────────

struct ProbeArgs {
    std::string db;
    std::string lemma;
    std::string pattern = "*:_";
    double alpha = 0.0;  // > 0 adds an exploratory smoothed estimate
    gapcheck::Thresholds thresholds;
};

int run_probe(const ProbeArgs& args) {
    args.thresholds.check_bands();
    args.thresholds.check_divergence();
    gapcheck::FrequencyDatabase db = load_db(args.db);
    gapcheck::FeaturePattern pattern = gapcheck::FeaturePattern::parse(args.pattern);

    gapcheck::GapSpec spec;
    spec.language = db.language();
    spec.lemma = args.lemma;
    spec.patterns = {pattern};
    auto verdicts = gapcheck::validate(db, spec, args.thresholds);
    const gapcheck::Verdict& v = verdicts.front();

    std::cout << "lemma\t" << v.lemma << "\n";
    std::cout << "pattern\t" << pattern.serialize() << "\n";
    std::cout << "attested\t" << (v.attested ? "true" : "false") << "\n";
    std::cout << "n_w\t" << v.n_w << "\n";
    std::cout << "n_l\t" << v.n_l << "\n";
    std::cout << "n_f\t" << v.n_f << "\n";
    std::cout << "N\t" << v.total << "\n";
    std::cout << "log_odds\t"
              << (v.log_odds.is_unattested() ? std::string("unattested")
                                             : gapcheck::text::fmt_double(v.log_odds.value()))
              << "\n";
    std::cout << "band\t"
              << (v.band ? gapcheck::to_string(*v.band) : std::string_view("NotAttested")) << "\n";
    std::cout << "divergence\t" << gapcheck::to_string(v.divergence) << "\n";
    if (args.alpha > 0.0 && v.attested) {
        auto t = gapcheck::mle_probs(db, v.lemma, pattern);
        std::cout << "log_odds_smoothed\t"
                  << gapcheck::text::fmt_double(gapcheck::log_odds_smoothed(t, args.alpha).value())
                  << "\n";
    }
    return kOk;
}

// ── fetch-gaps ───────────────────────────────────────────────────────

struct FetchArgs {
    std::string language;
    std::string section;
    std::string category;
    std::string out;
    std::string unmapped_out;
    std::string cache_dir;
    std::string endpoint = "https://en.wiktionary.org/w/api.php";
    std::string user_agent;
    std::string phrase_map_path;
    std::string dump_path;
    int rate_limit_ms = 1000;
    int max_pages = 0;  // 0 = no limit
    bool offline = false;
};

std::string default_section(const std::string& language) {
    if (language == "la") return "Latin";
    if (language == "it") return "Italian";
    return "";
}

std::string default_category(const std::string& section) {
    return section.empty() ? "" : section + " defective verbs";
}

nlohmann::ordered_json annotation_json(const gapcheck::RawGapAnnotation& ann) {
    nlohmann::ordered_json j;
    j["page"] = ann.page;
    j["language"] = ann.language;
    j["template"] = ann.template_name;
    j["lemma"] = ann.lemma;
    j["phrases"] = ann.phrases;
    j["raw"] = ann.raw_span;
    return j;
}

int run_fetch_gaps(const FetchArgs& args) {
    std::string section = args.section.empty() ? default_section(args.language) : args.section;
    if (section.empty())
        throw gapcheck::ConfigError("no built-in section name for language '" + args.language +
                                    "'; pass --section");
    std::string category = args.category.empty() ? default_category(section) : args.category;

    gapcheck::PhraseMap phrase_map = gapcheck::PhraseMap::defaults();
    if (!args.phrase_map_path.empty())
        phrase_map.load_json(gapcheck::fs::read_file(args.phrase_map_path), args.phrase_map_path);

    std::vector<gapcheck::RawGapAnnotation> annotations;
    std::uint64_t pages_seen = 0, pages_without_section = 0;

    auto harvest = [&](const std::string& title, const std::string& wikitext) {
        ++pages_seen;
        try {
            auto anns = gapcheck::parse_gap_annotations(title, wikitext, section);
            annotations.insert(annotations.end(), anns.begin(), anns.end());
        } catch (const gapcheck::DataError&) {
            ++pages_without_section;
        }
    };

    if (!args.dump_path.empty()) {
        std::ifstream in(args.dump_path, std::ios::binary);
        if (!in) throw gapcheck::DataError("cannot open dump '" + args.dump_path + "'");
        gapcheck::for_each_dump_page(in, [&](const std::string& title, const std::string& text) {
            if (title.find(':') == std::string::npos) harvest(title, text);
            return args.max_pages == 0 || pages_seen < static_cast<std::uint64_t>(args.max_pages);
        });
    } else {
        gapcheck::ClientConfig config;
        config.endpoint = args.endpoint;
        config.cache_dir = args.cache_dir;
        config.offline = args.offline;
        config.min_interval = std::chrono::milliseconds(args.rate_limit_ms);
        if (!args.user_agent.empty()) config.user_agent = args.user_agent;

        std::shared_ptr<gapcheck::HttpTransport> transport;
        if (!config.offline)
            transport = std::make_shared<gapcheck::HttplibTransport>(config.user_agent);
        gapcheck::MediaWikiClient client(config, transport);

        gapcheck::CategoryListing listing = client.fetch_category(category);
        std::cerr << "fetch-gaps: category '" << category << "' has " << listing.members.size()
                  << " member(s)\n";
        for (const std::string& title : listing.members) {
            if (title.find(':') != std::string::npos) continue;  // skip non-mainspace members
            if (args.max_pages > 0 && pages_seen >= static_cast<std::uint64_t>(args.max_pages)) break;
            harvest(title, client.fetch_wikitext(title));
        }
        std::cerr << "fetch-gaps: " << client.requests_made() << " request(s), "
                  << client.cache_hits() << " cache hit(s)\n";
    }

    gapcheck::CompileResult compiled = gapcheck::compile_gapspecs(annotations, phrase_map);
    write_output(args.out, gapcheck::serialize_gapspecs_json(compiled.specs));

    nlohmann::ordered_json unmapped = nlohmann::ordered_json::array();
    for (const auto& ann : compiled.unmapped) unmapped.push_back(annotation_json(ann));
    std::string unmapped_path =
        args.unmapped_out.empty() ? (args.out.empty() || args.out == "-"
                                         ? std::string()
                                         : args.out + ".unmapped.json")
                                  : args.unmapped_out;
    if (!unmapped_path.empty()) gapcheck::fs::atomic_write_file(unmapped_path, unmapped.dump(2) + "\n");

    std::cerr << "fetch-gaps: " << pages_seen << " page(s), " << annotations.size()
              << " annotation(s): " << compiled.mapped.size() << " mapped into "
              << compiled.specs.size() << " spec(s), " << compiled.unmapped.size()
              << " unmapped for review";
    if (pages_without_section) std::cerr << "; " << pages_without_section << " page(s) lacked a '"
                                         << section << "' section";
    std::cerr << "\n";
    return kOk;
}

void add_threshold_flags(CLI::App* cmd, gapcheck::Thresholds& th) {
    cmd->add_option("--defective-max", th.defective_max,
                    "Counts <= this are Likely Defective (default 10)");
    cmd->add_option("--edge-max", th.edge_max, "Counts <= this are On the Edge (default 100)");
    cmd->add_option("--lor-large", th.lor_large, "Log-odds above this is a large divergence (default 1.9)");
    cmd->add_option("--lor-moderate", th.lor_moderate,
                    "Log-odds above this is a moderate divergence (default 1.5)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"corpus statistics for validating morphological gap claims"};
    app.set_version_flag("--version", "gapcheck 1.0.0");
    app.require_subcommand(1);

    CountArgs count_args;
    CLI::App* count = app.add_subcommand("count", "Build a frequency database from CoNLL-U input");
    count->add_option("inputs", count_args.inputs, "Tagged CoNLL-U files")->required()->expected(-1);
    count->add_option("-o,--out", count_args.out, "Merged database path")->required();
    count->add_option("--manifest", count_args.manifest, "Manifest path (default: <out>.manifest.json)");
    count->add_option("-l,--language", count_args.language, "Language tag recorded in the database");
    count->add_option("--shards", count_args.shards, "Number of shards (default 1)")
        ->check(CLI::PositiveNumber);
    count->add_option("-j,--jobs", count_args.jobs, "Worker threads (default: one per shard)");
    count->add_option("--exclude-upos", count_args.exclude,
                      "Comma-separated UPOS tags to exclude, or 'none' (default PUNCT,SYM,X)");
    count->add_flag("--strict", count_args.strict, "Abort on malformed input instead of skipping");
    count->add_flag("--no-lowercase", count_args.no_lowercase, "Keep lemma capitalization");
    count->add_flag("--allow-partial", count_args.allow_partial,
                    "Merge completed shards even if some failed");
    count->add_option("--force-fail-shard", count_args.force_fail, "Force shard ids to fail")
        ->group("");  // testing hook, hidden from help

    ValidateArgs validate_args;
    CLI::App* validate = app.add_subcommand("validate", "Evaluate gap claims against a database");
    validate->add_option("--db", validate_args.db, "Frequency database")->required();
    validate->add_option("--gaps", validate_args.gaps, "Gap-spec JSON file")->required();
    validate->add_option("-o,--out", validate_args.out, "Verdict TSV path (default stdout)");
    add_threshold_flags(validate, validate_args.thresholds);

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "Aggregate verdicts into summary tables");
    report->add_option("--verdicts", report_args.verdicts, "Verdict TSV file")->required();
    report->add_option("-o,--out", report_args.out, "Output path (default stdout)");
    report->add_option("-f,--format", report_args.format, "Output format: table, tsv or json")
        ->check(CLI::IsMember({"table", "tsv", "json"}));
    double lor_large = 0, lor_moderate = 0;
    auto* large_opt = report->add_option("--lor-large", lor_large, "Override the large-divergence threshold");
    auto* moderate_opt =
        report->add_option("--lor-moderate", lor_moderate, "Override the moderate-divergence threshold");

    ProbeArgs probe_args;
    CLI::App* probe = app.add_subcommand("probe", "Inspect one (lemma, pattern) cell");
    probe->add_option("--db", probe_args.db, "Frequency database")->required();
    probe->add_option("lemma", probe_args.lemma, "Lemma to look up")->required();
    probe->add_option("pattern", probe_args.pattern,
                      "Feature pattern, e.g. 'VERB:Voice=Pass' (default '*:_')");
    probe->add_option("--alpha", probe_args.alpha,
                      "Also print an add-alpha smoothed log-odds (exploration only; "
                      "never feeds classification)");
    add_threshold_flags(probe, probe_args.thresholds);

    FetchArgs fetch_args;
    CLI::App* fetch = app.add_subcommand("fetch-gaps", "Compile gap claims from Wiktionary");
    fetch->add_option("-l,--language", fetch_args.language, "Language tag (la, it)")->required();
    fetch->add_option("--section", fetch_args.section, "Wiktionary language section name");
    fetch->add_option("--category", fetch_args.category,
                      "Category to list (default: '<Section> defective verbs')");
    fetch->add_option("-o,--out", fetch_args.out, "Gap-spec JSON output path")->required();
    fetch->add_option("--unmapped-out", fetch_args.unmapped_out,
                      "Unmapped-annotation JSON path (default: <out>.unmapped.json)");
    fetch->add_option("--cache", fetch_args.cache_dir, "Response cache directory")
        ->envname("GAPCHECK_CACHE");
    fetch->add_option("--endpoint", fetch_args.endpoint, "MediaWiki API endpoint");
    fetch->add_option("--user-agent", fetch_args.user_agent, "Override the HTTP client identifier");
    fetch->add_option("--phrase-map", fetch_args.phrase_map_path,
                      "JSON file extending the phrase-to-pattern map");
    fetch->add_option("--dump", fetch_args.dump_path, "Read pages from a MediaWiki XML dump instead");
    fetch->add_option("--rate-limit-ms", fetch_args.rate_limit_ms,
                      "Minimum interval between API requests (default 1000)");
    fetch->add_option("--max-pages", fetch_args.max_pages, "Stop after this many pages (0 = all)");
    fetch->add_flag("--offline", fetch_args.offline, "Serve everything from the cache");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (count->parsed()) return run_count(count_args);
        if (validate->parsed()) return run_validate(validate_args);
        if (report->parsed()) {
            if (*large_opt) report_args.lor_large = lor_large;
            if (*moderate_opt) report_args.lor_moderate = lor_moderate;
            return run_report(report_args);
        }
        if (probe->parsed()) return run_probe(probe_args);
        if (fetch->parsed()) return run_fetch_gaps(fetch_args);
        std::cerr << "no subcommand\n";
        return kUsage;
    } catch (const gapcheck::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const gapcheck::NetworkError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNetwork;
    } catch (const gapcheck::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
