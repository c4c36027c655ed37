#pragma once

// cpp-httplib-backed transport. Kept out of mediawiki.hpp so the client
// logic (paging, caching, rate limiting) stays testable with a fake
// transport and no sockets. Define GAPCHECK_WITH_TLS (and link OpenSSL)
// for https endpoints.

#ifdef GAPCHECK_WITH_TLS
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

#include <chrono>
#include <string>

#include "gapcheck/errors.hpp"
#include "gapcheck/mediawiki.hpp"

namespace gapcheck {

class HttplibTransport : public HttpTransport {
public:
    explicit HttplibTransport(std::string user_agent, std::chrono::seconds timeout = std::chrono::seconds(30))
        : user_agent_(std::move(user_agent)), timeout_(timeout) {}

    HttpResponse get(const std::string& url) override {
        auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw NetworkError("bad URL (no scheme): " + url);
        std::string scheme = url.substr(0, scheme_end);
        auto path_start = url.find('/', scheme_end + 3);
        std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

#ifndef GAPCHECK_WITH_TLS
        if (scheme == "https")
            throw NetworkError("built without TLS support; use an http endpoint or --offline: " + url);
#endif
        if (scheme != "http" && scheme != "https")
            throw NetworkError("unsupported URL scheme '" + scheme + "'");

        httplib::Client client(base);
        client.set_follow_location(true);
        client.set_connection_timeout(timeout_.count(), 0);
        client.set_read_timeout(timeout_.count(), 0);
        httplib::Headers headers = {{"User-Agent", user_agent_}};
        auto result = client.Get(path, headers);
        if (!result)
            throw NetworkError("transport failure for " + url + ": " + httplib::to_string(result.error()));
        return {result->status, result->body};
    }

private:
    std::string user_agent_;
    std::chrono::seconds timeout_;
};

} // namespace gapcheck
