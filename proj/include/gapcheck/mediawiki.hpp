#pragma once

// MediaWiki Action API client: paged category-member listing and page
// wikitext retrieval, cache-first. Every response is persisted verbatim,
// keyed by (endpoint, request, continuation), so analysis runs replay
// byte-identically offline; Wiktionary content drifts, a cache is a
// snapshot. One in-flight request at a time, a polite minimum interval
// between requests, and capped exponential backoff on server errors.

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "gapcheck/errors.hpp"
#include "gapcheck/fs.hpp"
#include "gapcheck/text.hpp"

namespace gapcheck {

struct HttpResponse {
    int status = 0;
    std::string body;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    // Fully-formed URL including query string. Throws NetworkError on
    // transport-level failure (DNS, refused, timeout).
    virtual HttpResponse get(const std::string& url) = 0;
};

inline std::string url_encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
            c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

// Verbatim response store. File names stay greppable: a sanitized prefix
// of the key plus its hash.
class ResponseCache {
public:
    explicit ResponseCache(std::string dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::string path_for(const std::string& key) const {
        std::string stem;
        for (char c : key.substr(0, 48)) {
            bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '-';
            stem.push_back(ok ? c : '_');
        }
        return (std::filesystem::path(dir_) / (stem + "-" + text::hex64(text::fnv1a64(key)) + ".json"))
            .string();
    }

    std::optional<std::string> get(const std::string& key) const {
        std::string path = path_for(key);
        if (!std::filesystem::exists(path)) return std::nullopt;
        return fs::read_file(path);
    }

    void put(const std::string& key, const std::string& body) const {
        fs::atomic_write_file(path_for(key), body);
    }

private:
    std::string dir_;
};

struct ClientConfig {
    std::string endpoint = "https://en.wiktionary.org/w/api.php";
    std::string user_agent = "gapcheck/1.0 (morphological gap validation; cache-first batch client)";
    std::string cache_dir;  // empty disables caching
    std::chrono::milliseconds min_interval{1000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{500};
    std::chrono::milliseconds backoff_cap{5000};
    bool offline = false;  // serve from cache only, never touch the network
};

struct CategoryListing {
    std::string category;
    std::string endpoint;
    std::vector<std::string> members;  // unique, in API order
    bool complete = false;             // all continuation pages consumed
    std::string fetched_at;
};

class MediaWikiClient {
public:
    MediaWikiClient(ClientConfig config, std::shared_ptr<HttpTransport> transport)
        : config_(std::move(config)), transport_(std::move(transport)) {
        if (!config_.cache_dir.empty()) cache_.emplace(config_.cache_dir);
        if (!transport_ && !config_.offline)
            throw ConfigError("MediaWikiClient needs a transport unless offline");
    }

    // Full member list of a category via paged categorymembers queries.
    // An unknown category is an empty listing, not an error.
    CategoryListing fetch_category(const std::string& category) {
        CategoryListing listing;
        listing.category = category;
        listing.endpoint = config_.endpoint;
        listing.fetched_at = fs::now_iso8601();

        std::string continuation;
        std::set<std::string> seen;
        while (true) {
            std::string url = config_.endpoint +
                              "?action=query&format=json&formatversion=2&list=categorymembers"
                              "&cmlimit=500&cmtitle=Category%3A" +
                              url_encode(category);
            std::string key = "categorymembers|" + config_.endpoint + "|" + category + "|" + continuation;
            if (!continuation.empty()) url += "&cmcontinue=" + url_encode(continuation);

            nlohmann::json doc = fetch_json(key, url);
            if (doc.contains("error"))
                throw DataError("API error for category '" + category +
                                "': " + doc["error"].value("info", doc["error"].dump()));
            if (!doc.contains("query") || !doc["query"].contains("categorymembers"))
                throw DataError("malformed categorymembers response: " + snippet(doc));
            for (const auto& member : doc["query"]["categorymembers"]) {
                std::string title = member.value("title", "");
                if (title.empty() || !seen.insert(title).second) continue;
                listing.members.push_back(std::move(title));
            }
            if (doc.contains("continue") && doc["continue"].contains("cmcontinue")) {
                continuation = doc["continue"]["cmcontinue"].get<std::string>();
            } else {
                listing.complete = true;
                break;
            }
        }
        return listing;
    }

    // Current wikitext of one page.
    std::string fetch_wikitext(const std::string& title) {
        std::string url = config_.endpoint +
                          "?action=query&format=json&formatversion=2&prop=revisions"
                          "&rvprop=content&rvslots=main&titles=" +
                          url_encode(title);
        std::string key = "wikitext|" + config_.endpoint + "|" + title;
        nlohmann::json doc = fetch_json(key, url);
        if (!doc.contains("query") || !doc["query"].contains("pages") || doc["query"]["pages"].empty())
            throw DataError("malformed revisions response for '" + title + "': " + snippet(doc));
        const auto& page = doc["query"]["pages"][0];
        if (page.value("missing", false)) throw DataError("page '" + title + "' does not exist");
        if (!page.contains("revisions") || page["revisions"].empty())
            throw DataError("page '" + title + "' has no revisions in response");
        return page["revisions"][0]["slots"]["main"].value("content", "");
    }

    std::uint64_t requests_made() const { return requests_; }
    std::uint64_t cache_hits() const { return cache_hits_; }

private:
    static std::string snippet(const nlohmann::json& doc) {
        std::string s = doc.dump();
        return s.size() > 200 ? s.substr(0, 200) + "..." : s;
    }

    nlohmann::json fetch_json(const std::string& key, const std::string& url) {
        std::string body = fetch_raw(key, url);
        try {
            return nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            std::string snip = body.size() > 200 ? body.substr(0, 200) + "..." : body;
            throw DataError("cannot parse API response as JSON (" + std::string(e.what()) +
                            "): " + snip);
        }
    }

    std::string fetch_raw(const std::string& key, const std::string& url) {
        if (cache_) {
            if (auto hit = cache_->get(key)) {
                ++cache_hits_;
                return *hit;
            }
        }
        if (config_.offline)
            throw NetworkError("offline mode and response not cached: " + key);
        if (!transport_) throw NetworkError("no transport configured");

        std::string last_error;
        for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) {
                auto backoff = config_.backoff_base * (1 << (attempt - 1));
                std::this_thread::sleep_for(std::min(backoff, config_.backoff_cap));
            }
            throttle();
            HttpResponse resp;
            try {
                ++requests_;
                resp = transport_->get(url);
            } catch (const std::exception& e) {
                last_error = e.what();  // transport failures are retryable
                continue;
            }
            if (resp.status >= 200 && resp.status < 300) {
                if (cache_) cache_->put(key, resp.body);
                return resp.body;
            }
            last_error = "HTTP " + std::to_string(resp.status);
            if (resp.status < 500) break;  // client errors will not improve on retry
        }
        throw NetworkError("request failed after retries (" + last_error + "): " + url);
    }

    void throttle() {
        auto now = std::chrono::steady_clock::now();
        if (last_request_) {
            auto elapsed = now - *last_request_;
            if (elapsed < config_.min_interval)
                std::this_thread::sleep_for(config_.min_interval - elapsed);
        }
        last_request_ = std::chrono::steady_clock::now();
    }

    ClientConfig config_;
    std::shared_ptr<HttpTransport> transport_;
    std::optional<ResponseCache> cache_;
    std::optional<std::chrono::steady_clock::time_point> last_request_;
    std::uint64_t requests_ = 0;
    std::uint64_t cache_hits_ = 0;
};

} // namespace gapcheck
