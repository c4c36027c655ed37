#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <map>
#include <thread>

#include "gapcheck/http_transport.hpp"
#include "gapcheck/mediawiki.hpp"
#include "support/helpers.hpp"

using namespace gapcheck;

namespace {

// Scripted transport: each URL maps to a queue of canned responses;
// an empty queue or unknown URL is a transport failure.
class FakeTransport : public HttpTransport {
public:
    void enqueue(const std::string& url, int status, std::string body) {
        responses_[url].push_back({status, std::move(body)});
    }
    void fail_next(int n) { fail_next_ = n; }
    HttpResponse get(const std::string& url) override {
        ++calls_;
        last_url_ = url;
        if (fail_next_ > 0) {
            --fail_next_;
            throw NetworkError("connection reset (scripted)");
        }
        auto it = responses_.find(url);
        if (it == responses_.end() || it->second.empty())
            throw NetworkError("unscripted URL: " + url);
        HttpResponse r = it->second.front();
        it->second.erase(it->second.begin());
        return r;
    }
    int calls() const { return calls_; }
    const std::string& last_url() const { return last_url_; }

private:
    std::map<std::string, std::vector<HttpResponse>> responses_;
    int calls_ = 0;
    int fail_next_ = 0;
    std::string last_url_;
};

ClientConfig fast_config(const std::string& endpoint, const std::string& cache_dir = "") {
    ClientConfig cfg;
    cfg.endpoint = endpoint;
    cfg.cache_dir = cache_dir;
    cfg.min_interval = std::chrono::milliseconds(0);
    cfg.backoff_base = std::chrono::milliseconds(1);
    cfg.backoff_cap = std::chrono::milliseconds(2);
    return cfg;
}

const std::string kEp = "http://wiki.test/api.php";

std::string members_page(const std::vector<std::string>& titles, const std::string& cont) {
    nlohmann::json j;
    j["batchcomplete"] = true;
    auto arr = nlohmann::json::array();
    for (const auto& t : titles) arr.push_back({{"pageid", 1}, {"ns", 0}, {"title", t}});
    j["query"]["categorymembers"] = arr;
    if (!cont.empty()) j["continue"]["cmcontinue"] = cont;
    return j.dump();
}

std::string category_url(const std::string& category, const std::string& cont) {
    std::string url = kEp +
                      "?action=query&format=json&formatversion=2&list=categorymembers"
                      "&cmlimit=500&cmtitle=Category%3A" +
                      url_encode(category);
    if (!cont.empty()) url += "&cmcontinue=" + url_encode(cont);
    return url;
}

std::string revision_body(const std::string& content) {
    nlohmann::json j;
    j["query"]["pages"] = nlohmann::json::array(
        {{{"pageid", 7},
          {"title", "x"},
          {"revisions",
           nlohmann::json::array({{{"slots", {{"main", {{"content", content}}}}}}})}}});
    return j.dump();
}

} // namespace

TEST_CASE("category paging resumes exactly across continuation boundaries", "[mediawiki]") {
    auto transport = std::make_shared<FakeTransport>();
    transport->enqueue(category_url("Latin defective verbs", ""),
                       200, members_page({"aio", "discrepo"}, "page2"));
    transport->enqueue(category_url("Latin defective verbs", "page2"),
                       200, members_page({"excommunico", "discrepo"}, "page3"));  // dup across pages
    transport->enqueue(category_url("Latin defective verbs", "page3"),
                       200, members_page({"inquam"}, ""));

    MediaWikiClient client(fast_config(kEp), transport);
    CategoryListing listing = client.fetch_category("Latin defective verbs");
    CHECK(listing.complete);
    CHECK(listing.members == std::vector<std::string>{"aio", "discrepo", "excommunico", "inquam"});
    CHECK(transport->calls() == 3);
}

TEST_CASE("unknown category is an explicit empty listing, not an error", "[mediawiki]") {
    auto transport = std::make_shared<FakeTransport>();
    transport->enqueue(category_url("No such category", ""), 200, members_page({}, ""));
    MediaWikiClient client(fast_config(kEp), transport);
    CategoryListing listing = client.fetch_category("No such category");
    CHECK(listing.members.empty());
    CHECK(listing.complete);
}

TEST_CASE("warm cache serves identical results offline", "[mediawiki]") {
    testutil::TempDir tmp;
    {
        auto transport = std::make_shared<FakeTransport>();
        transport->enqueue(category_url("Cat", ""), 200, members_page({"uno", "due"}, ""));
        MediaWikiClient client(fast_config(kEp, tmp.file("cache")), transport);
        auto first = client.fetch_category("Cat");
        CHECK(first.members.size() == 2);
        CHECK(client.requests_made() == 1);
    }
    {
        // no transport at all: everything must come from the cache
        MediaWikiClient client([&] {
            auto cfg = fast_config(kEp, tmp.file("cache"));
            cfg.offline = true;
            return cfg;
        }(), nullptr);
        auto again = client.fetch_category("Cat");
        CHECK(again.members == std::vector<std::string>{"uno", "due"});
        CHECK(client.cache_hits() == 1);
        CHECK(client.requests_made() == 0);

        CHECK_THROWS_AS(client.fetch_category("Uncached"), NetworkError);
    }
}

TEST_CASE("server errors retry with backoff, client errors do not", "[mediawiki]") {
    SECTION("5xx then success") {
        auto transport = std::make_shared<FakeTransport>();
        transport->enqueue(category_url("Cat", ""), 500, "boom");
        transport->enqueue(category_url("Cat", ""), 503, "busy");
        transport->enqueue(category_url("Cat", ""), 200, members_page({"uno"}, ""));
        MediaWikiClient client(fast_config(kEp), transport);
        CHECK(client.fetch_category("Cat").members.size() == 1);
        CHECK(transport->calls() == 3);
    }
    SECTION("persistent 5xx surfaces after retries") {
        auto transport = std::make_shared<FakeTransport>();
        for (int i = 0; i < 4; ++i) transport->enqueue(category_url("Cat", ""), 500, "boom");
        MediaWikiClient client(fast_config(kEp), transport);
        CHECK_THROWS_AS(client.fetch_category("Cat"), NetworkError);
        CHECK(transport->calls() == 4);  // initial + max_retries
    }
    SECTION("4xx fails immediately") {
        auto transport = std::make_shared<FakeTransport>();
        transport->enqueue(category_url("Cat", ""), 403, "no");
        MediaWikiClient client(fast_config(kEp), transport);
        CHECK_THROWS_AS(client.fetch_category("Cat"), NetworkError);
        CHECK(transport->calls() == 1);
    }
    SECTION("transport exceptions are retryable") {
        auto transport = std::make_shared<FakeTransport>();
        transport->fail_next(2);
        transport->enqueue(category_url("Cat", ""), 200, members_page({"uno"}, ""));
        MediaWikiClient client(fast_config(kEp), transport);
        CHECK(client.fetch_category("Cat").members.size() == 1);
        CHECK(transport->calls() == 3);
    }
}

TEST_CASE("rate limiting enforces the minimum request interval", "[mediawiki]") {
    auto transport = std::make_shared<FakeTransport>();
    transport->enqueue(category_url("Cat", ""), 200, members_page({"a"}, "p2"));
    transport->enqueue(category_url("Cat", "p2"), 200, members_page({"b"}, "p3"));
    transport->enqueue(category_url("Cat", "p3"), 200, members_page({"c"}, ""));

    ClientConfig cfg = fast_config(kEp);
    cfg.min_interval = std::chrono::milliseconds(40);
    MediaWikiClient client(cfg, transport);
    auto start = std::chrono::steady_clock::now();
    client.fetch_category("Cat");
    auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(elapsed >= std::chrono::milliseconds(80));  // 3 requests, 2 waits
}

TEST_CASE("wikitext fetch extracts revision content and flags missing pages", "[mediawiki]") {
    auto transport = std::make_shared<FakeTransport>();
    std::string url = kEp +
                      "?action=query&format=json&formatversion=2&prop=revisions"
                      "&rvprop=content&rvslots=main&titles=discrepo";
    transport->enqueue(url, 200, revision_body("==Latin==\ntext"));
    MediaWikiClient client(fast_config(kEp), transport);
    CHECK(client.fetch_wikitext("discrepo") == "==Latin==\ntext");

    nlohmann::json missing;
    missing["query"]["pages"] = nlohmann::json::array({{{"title", "nope"}, {"missing", true}}});
    std::string url2 = kEp +
                       "?action=query&format=json&formatversion=2&prop=revisions"
                       "&rvprop=content&rvslots=main&titles=nope";
    transport->enqueue(url2, 200, missing.dump());
    CHECK_THROWS_AS(client.fetch_wikitext("nope"), DataError);
}

TEST_CASE("malformed payloads carry a snippet in the error", "[mediawiki]") {
    auto transport = std::make_shared<FakeTransport>();
    transport->enqueue(category_url("Cat", ""), 200, "<html>not json</html>");
    MediaWikiClient client(fast_config(kEp), transport);
    try {
        client.fetch_category("Cat");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("<html>") != std::string::npos);
    }
}

TEST_CASE("response cache writes are atomic and keys are distinct", "[mediawiki]") {
    testutil::TempDir tmp;
    ResponseCache cache(tmp.file("cache"));
    CHECK_FALSE(cache.get("k1").has_value());
    cache.put("k1", "v1");
    cache.put("key with spaces / slashes", "v2");
    CHECK(cache.get("k1") == "v1");
    CHECK(cache.get("key with spaces / slashes") == "v2");
    CHECK(cache.path_for("k1") != cache.path_for("k2"));
}

TEST_CASE("httplib transport works against a local server", "[mediawiki][net]") {
    httplib::Server server;
    server.Get("/api.php", [](const httplib::Request& req, httplib::Response& res) {
        if (req.get_param_value("list") == "categorymembers") {
            res.set_content(members_page({"discrepo"}, ""), "application/json");
        } else {
            res.set_content(revision_body("==Latin==\n{{la-verb|1+.nopass|discrepō}}\n"),
                            "application/json");
        }
    });
    int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread serving([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    std::string endpoint = "http://127.0.0.1:" + std::to_string(port) + "/api.php";
    auto transport = std::make_shared<HttplibTransport>("gapcheck-tests/1.0");
    MediaWikiClient client(fast_config(endpoint), transport);
    CategoryListing listing = client.fetch_category("Latin defective verbs");
    CHECK(listing.members == std::vector<std::string>{"discrepo"});
    CHECK(client.fetch_wikitext("discrepo").find("nopass") != std::string::npos);

    server.stop();
    serving.join();
}
