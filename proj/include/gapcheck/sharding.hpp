#pragma once

// Sharded counting with a manifest. Input files are assigned
// round-robin to shards; each shard builds and writes its own database,
// and the manifest tracks per-shard status so failed shards are
// detectable and re-runnable. Distributed tagging pipelines lose nodes;
// a merge must either see every shard or be told --allow-partial.
//
// The merged database is byte-identical for any shard count: counting is
// order-independent and merge is an exact keywise sum.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gapcheck/conllu.hpp"
#include "gapcheck/errors.hpp"
#include "gapcheck/freqdb.hpp"
#include "gapcheck/fs.hpp"

namespace gapcheck {

struct ShardRecord {
    int id = 0;
    std::vector<std::string> inputs;
    std::string output;
    std::string status = "pending";  // pending | done | failed
    std::string checksum;            // fnv1a64 of the shard db file
    std::string error;
    std::uint64_t tokens = 0;
};

struct ShardManifest {
    int version = 1;
    std::string created;  // timestamps live here, never in data files
    std::string language;
    std::string options;
    std::string merged_output;
    std::vector<ShardRecord> shards;

    bool complete() const {
        return std::all_of(shards.begin(), shards.end(),
                           [](const ShardRecord& s) { return s.status == "done"; });
    }

    std::vector<int> failed_ids() const {
        std::vector<int> out;
        for (const ShardRecord& s : shards)
            if (s.status == "failed") out.push_back(s.id);
        return out;
    }

    std::string serialize() const {
        nlohmann::ordered_json j;
        j["version"] = version;
        j["created"] = created;
        j["language"] = language;
        j["options"] = options;
        j["merged_output"] = merged_output;
        j["shards"] = nlohmann::ordered_json::array();
        for (const ShardRecord& s : shards) {
            nlohmann::ordered_json sj;
            sj["id"] = s.id;
            sj["inputs"] = s.inputs;
            sj["output"] = s.output;
            sj["status"] = s.status;
            sj["checksum"] = s.checksum;
            sj["error"] = s.error;
            sj["tokens"] = s.tokens;
            j["shards"].push_back(std::move(sj));
        }
        return j.dump(2) + "\n";
    }

    static ShardManifest parse(const std::string& body, const std::string& source = "<manifest>") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(source + ": invalid manifest JSON: " + e.what());
        }
        ShardManifest m;
        m.version = j.value("version", 0);
        if (m.version != 1) throw DataError(source + ": unsupported manifest version");
        m.created = j.value("created", "");
        m.language = j.value("language", "");
        m.options = j.value("options", "");
        m.merged_output = j.value("merged_output", "");
        for (const auto& sj : j.value("shards", nlohmann::json::array())) {
            ShardRecord s;
            s.id = sj.value("id", 0);
            s.inputs = sj.value("inputs", std::vector<std::string>{});
            s.output = sj.value("output", "");
            s.status = sj.value("status", "");
            s.checksum = sj.value("checksum", "");
            s.error = sj.value("error", "");
            s.tokens = sj.value("tokens", std::uint64_t{0});
            if (s.status != "pending" && s.status != "done" && s.status != "failed")
                throw DataError(source + ": bad shard status '" + s.status + "'");
            m.shards.push_back(std::move(s));
        }
        return m;
    }

    void save(const std::string& path) const { fs::atomic_write_file(path, serialize()); }
    static ShardManifest load(const std::string& path) { return parse(fs::read_file(path), path); }
};

struct CountJob {
    std::vector<std::string> inputs;
    std::string out_path;
    std::string manifest_path;
    std::string language = "und";
    BuildOptions options;
    ParseMode mode = ParseMode::Lenient;
    int shards = 1;
    int jobs = 0;  // 0 = one thread per shard, capped by hardware
    bool allow_partial = false;
    std::vector<int> force_fail;  // shard ids made to fail; testing hook
};

struct CountOutcome {
    ShardManifest manifest;
    std::optional<FrequencyDatabase> merged;
    int failed = 0;
    bool merged_written = false;
    ReaderDiagnostics diagnostics;  // summed over shards
};

namespace sharddetail {

inline FrequencyDatabase count_shard(const ShardRecord& record, const CountJob& job,
                                     ReaderDiagnostics& diag) {
    DbBuilder builder(job.language, job.options);
    for (const std::string& path : record.inputs) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw DataError("cannot open input '" + path + "'");
        ConlluReader reader(in, ReaderOptions{job.mode}, path);
        AnnotatedToken tok;
        while (reader.next(tok)) builder.add(tok);
        const ReaderDiagnostics& d = reader.diagnostics();
        diag.lines += d.lines;
        diag.tokens += d.tokens;
        diag.malformed_lines += d.malformed_lines;
        diag.malformed_feats += d.malformed_feats;
        diag.invalid_utf8 += d.invalid_utf8;
        diag.skipped_ranges += d.skipped_ranges;
        diag.skipped_empty_nodes += d.skipped_empty_nodes;
    }
    if (std::find(job.force_fail.begin(), job.force_fail.end(), record.id) != job.force_fail.end())
        throw DataError("shard " + std::to_string(record.id) + " forced to fail (test hook)");
    return builder.finish();
}

inline std::string shard_output_path(const std::string& out_path, int id) {
    char suffix[24];
    std::snprintf(suffix, sizeof suffix, ".shard%03d", id);
    return out_path + suffix;
}

} // namespace sharddetail

// Runs the whole job: shard assignment, parallel counting, per-shard
// database files, manifest bookkeeping and (when permitted) the merge.
inline CountOutcome run_sharded_count(const CountJob& job) {
    if (job.inputs.empty()) throw ConfigError("no input files given");
    if (job.shards < 1) throw ConfigError("shard count must be >= 1");
    if (job.out_path.empty()) throw ConfigError("no output path given");

    CountOutcome outcome;
    ShardManifest& manifest = outcome.manifest;
    manifest.created = fs::now_iso8601();
    manifest.language = job.language;
    manifest.options = job.options.encode();
    manifest.merged_output = job.out_path;

    for (int id = 0; id < job.shards; ++id) {
        ShardRecord record;
        record.id = id;
        record.output = sharddetail::shard_output_path(job.out_path, id);
        manifest.shards.push_back(std::move(record));
    }
    for (std::size_t i = 0; i < job.inputs.size(); ++i)
        manifest.shards[i % static_cast<std::size_t>(job.shards)].inputs.push_back(job.inputs[i]);

    std::string manifest_path =
        job.manifest_path.empty() ? job.out_path + ".manifest.json" : job.manifest_path;
    manifest.save(manifest_path);

    std::vector<std::optional<FrequencyDatabase>> shard_dbs(manifest.shards.size());
    std::mutex mu;
    std::atomic<std::size_t> next{0};

    int threads = job.jobs > 0 ? job.jobs : job.shards;
    threads = std::max(1, std::min<int>({threads, job.shards,
                                         static_cast<int>(std::thread::hardware_concurrency() ?
                                                          std::thread::hardware_concurrency() : 1)}));

    auto worker = [&]() {
        for (std::size_t id; (id = next.fetch_add(1)) < manifest.shards.size();) {
            ReaderDiagnostics diag;
            try {
                FrequencyDatabase db = sharddetail::count_shard(manifest.shards[id], job, diag);
                std::ostringstream buf;
                db.save(buf);
                fs::atomic_write_file(manifest.shards[id].output, buf.str());

                std::lock_guard<std::mutex> lock(mu);
                manifest.shards[id].status = "done";
                manifest.shards[id].checksum = fs::file_checksum(manifest.shards[id].output);
                manifest.shards[id].tokens = db.total();
                shard_dbs[id] = std::move(db);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                manifest.shards[id].status = "failed";
                manifest.shards[id].error = e.what();
            }
            std::lock_guard<std::mutex> lock(mu);
            outcome.diagnostics.lines += diag.lines;
            outcome.diagnostics.tokens += diag.tokens;
            outcome.diagnostics.malformed_lines += diag.malformed_lines;
            outcome.diagnostics.malformed_feats += diag.malformed_feats;
            outcome.diagnostics.invalid_utf8 += diag.invalid_utf8;
            outcome.diagnostics.skipped_ranges += diag.skipped_ranges;
            outcome.diagnostics.skipped_empty_nodes += diag.skipped_empty_nodes;
            manifest.save(manifest_path);
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    outcome.failed = static_cast<int>(manifest.failed_ids().size());
    if (outcome.failed > 0 && !job.allow_partial) {
        manifest.save(manifest_path);
        return outcome;  // caller reports the partial-shard failure
    }

    FrequencyDatabase merged = build_database({}, job.language, job.options);
    for (auto& db : shard_dbs)
        if (db) merged = FrequencyDatabase::merge(merged, *db);

    std::vector<std::string> inputs = job.inputs;
    std::sort(inputs.begin(), inputs.end());
    inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
    merged.set_metadata("inputs", text::join(inputs, ","));
    if (outcome.failed > 0) {
        merged.set_metadata("partial", "true");
        std::vector<std::string> failed;
        for (int id : manifest.failed_ids()) failed.push_back(std::to_string(id));
        merged.set_metadata("failed_shards", text::join(failed, ","));
    }

    std::ostringstream buf;
    merged.save(buf);
    fs::atomic_write_file(job.out_path, buf.str());
    outcome.merged = std::move(merged);
    outcome.merged_written = true;
    manifest.save(manifest_path);
    return outcome;
}

} // namespace gapcheck
