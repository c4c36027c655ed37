#pragma once

#include <stdexcept>
#include <string>

namespace gapcheck {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad thresholds, incompatible build options, language mismatches.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed input data: db rows, gap-spec entries, wikitext sections,
// API payloads. Carries whatever row/entry context the thrower had.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Malformed CoNLL-U line in strict mode. Knows where it happened.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::uint64_t line, const std::string& msg)
        : Error(source + ":" + std::to_string(line) + ": " + msg),
          source_(source), line_(line) {}

    const std::string& source() const { return source_; }
    std::uint64_t line() const { return line_; }

private:
    std::string source_;
    std::uint64_t line_;
};

// Statistics requested for a lemma with no corpus attestation (n_l = 0)
// or an empty database. Callers are expected to gate on attestation.
class NotAttestedError : public Error {
public:
    explicit NotAttestedError(const std::string& msg) : Error(msg) {}
};

// HTTP/transport failure that survived the retry policy, or a network
// operation attempted in offline mode without a warm cache.
class NetworkError : public Error {
public:
    explicit NetworkError(const std::string& msg) : Error(msg) {}
};

} // namespace gapcheck
