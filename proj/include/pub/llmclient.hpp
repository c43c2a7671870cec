#pragma once

#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "pub/io.hpp"

namespace pub {

struct ChatMessage {
    std::string role;  // "system" or "user"
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;

    json to_json() const;
};

/// Canonical serialized body: nlohmann stores object keys sorted, so dump()
/// yields a stable byte sequence for identical requests.
std::string canonical_request_body(const ChatRequest& req);

/// 16-hex-digit FNV-1a-64 of the canonical body.
std::string request_fingerprint(const ChatRequest& req);

enum class CassetteMode { live, record, replay };

CassetteMode cassette_mode_from_string(const std::string& s);
std::string cassette_mode_name(CassetteMode m);

struct LlmError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CassetteMissError : LlmError {
    explicit CassetteMissError(const std::string& fingerprint)
        : LlmError("cassette miss for request fingerprint " + fingerprint),
          fingerprint(fingerprint) {}
    std::string fingerprint;
};

struct TransportError : LlmError {
    using LlmError::LlmError;
};

/// Transport client for OpenAI-compatible chat completions with
/// record/replay cassettes. Thread safe; at most `max_inflight` concurrent
/// network requests.
class LlmClient {
public:
    struct Options {
        std::string base_url;  // e.g. "http://127.0.0.1:8089/v1"
        std::string api_key;   // falls back to $PUB_LLM_API_KEY
        CassetteMode mode = CassetteMode::replay;
        std::filesystem::path cassette_path;
        int timeout_seconds = 60;
        int max_inflight = 4;
        int retries = 2;            // transport retries after the first attempt
        int backoff_ms = 250;       // exponential: backoff_ms, 2*backoff_ms, ...
    };

    explicit LlmClient(Options opt);

    /// Sends (or replays) one request and returns the assistant message text.
    std::string chat(const ChatRequest& req);

    const Options& options() const { return opt_; }
    std::size_t cassette_size() const;
    std::size_t network_calls() const;

private:
    std::string perform_network(const std::string& body);
    static std::string extract_assistant_text(const std::string& response_body);
    void append_cassette_entry(const std::string& fingerprint, const std::string& body);

    Options opt_;
    std::map<std::string, std::string> cassette_;  // fingerprint -> raw response body
    mutable std::mutex mutex_;
    std::condition_variable slot_cv_;
    int inflight_ = 0;
    std::size_t network_calls_ = 0;
};

}  // namespace pub
