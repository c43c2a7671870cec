#include "pub/llmclient.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "pub/rng.hpp"

namespace pub {

json ChatRequest::to_json() const {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    return json{{"model", model},
                {"messages", std::move(msgs)},
                {"temperature", temperature},
                {"max_tokens", max_tokens}};
}

std::string canonical_request_body(const ChatRequest& req) { return req.to_json().dump(); }

std::string request_fingerprint(const ChatRequest& req) {
    const std::uint64_t h = fnv1a64(canonical_request_body(req));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

CassetteMode cassette_mode_from_string(const std::string& s) {
    if (s == "live") return CassetteMode::live;
    if (s == "record") return CassetteMode::record;
    if (s == "replay") return CassetteMode::replay;
    throw LlmError("unknown cassette mode: " + s);
}

std::string cassette_mode_name(CassetteMode m) {
    switch (m) {
        case CassetteMode::live: return "live";
        case CassetteMode::record: return "record";
        case CassetteMode::replay: return "replay";
    }
    return "?";
}

LlmClient::LlmClient(Options opt) : opt_(std::move(opt)) {
    if (opt_.api_key.empty()) {
        if (const char* env = std::getenv("PUB_LLM_API_KEY")) opt_.api_key = env;
    }
    if (opt_.mode != CassetteMode::live && !opt_.cassette_path.empty() &&
        std::filesystem::exists(opt_.cassette_path)) {
        std::ifstream in(opt_.cassette_path);
        if (!in) throw IoError("cannot open cassette: " + opt_.cassette_path.string());
        for_each_line(in, [&](const std::string& line) {
            json entry = json::parse(line, nullptr, false);
            if (entry.is_discarded() || !entry.contains("fingerprint") || !entry.contains("response"))
                throw LlmError("malformed cassette entry in " + opt_.cassette_path.string());
            cassette_[entry["fingerprint"].get<std::string>()] = entry["response"].get<std::string>();
        });
    }
    if (opt_.mode != CassetteMode::replay) {
        if (opt_.base_url.empty())
            throw LlmError(cassette_mode_name(opt_.mode) + " mode requires an endpoint base_url");
        if (opt_.api_key.empty())
            throw LlmError(cassette_mode_name(opt_.mode) +
                           " mode requires an API key (options or $PUB_LLM_API_KEY)");
    }
    if (opt_.max_inflight < 1) opt_.max_inflight = 1;
}

std::size_t LlmClient::cassette_size() const {
    std::lock_guard lock(mutex_);
    return cassette_.size();
}

std::size_t LlmClient::network_calls() const {
    std::lock_guard lock(mutex_);
    return network_calls_;
}

std::string LlmClient::extract_assistant_text(const std::string& response_body) {
    json body = json::parse(response_body, nullptr, false);
    if (body.is_discarded()) throw LlmError("response body is not valid JSON");
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
        throw LlmError("response body has no choices");
    const json& msg = body["choices"][0]["message"];
    if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string())
        throw LlmError("response choice has no message content");
    return msg["content"].get<std::string>();
}

void LlmClient::append_cassette_entry(const std::string& fingerprint, const std::string& body) {
    if (opt_.cassette_path.empty()) return;
    std::filesystem::create_directories(opt_.cassette_path.parent_path());
    std::ofstream out(opt_.cassette_path, std::ios::app);
    if (!out) throw IoError("cannot append to cassette: " + opt_.cassette_path.string());
    out << json{{"fingerprint", fingerprint}, {"response", body}}.dump() << '\n';
}

std::string LlmClient::perform_network(const std::string& body) {
    // Split base_url into origin and path prefix.
    std::string origin = opt_.base_url;
    std::string prefix;
    const auto scheme_end = origin.find("://");
    const auto path_start =
        origin.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        prefix = origin.substr(path_start);
        origin = origin.substr(0, path_start);
    }
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

    httplib::Client cli(origin);
    cli.set_connection_timeout(opt_.timeout_seconds, 0);
    cli.set_read_timeout(opt_.timeout_seconds, 0);
    cli.set_write_timeout(opt_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!opt_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opt_.api_key);

    std::string last_error;
    for (int attempt = 0; attempt <= opt_.retries; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(opt_.backoff_ms << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        auto res = cli.Post(prefix + "/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) return res->body;
        last_error = "HTTP " + std::to_string(res->status);
        if (res->status >= 400 && res->status < 500 && res->status != 429) break;  // not retryable
    }
    throw TransportError("chat request failed after retries: " + last_error);
}

std::string LlmClient::chat(const ChatRequest& req) {
    if (req.messages.empty()) throw LlmError("chat request has no messages");
    if (req.messages.front().role != "system")
        throw LlmError("first chat message must have role=system");

    const std::string fingerprint = request_fingerprint(req);

    if (opt_.mode != CassetteMode::live) {
        std::lock_guard lock(mutex_);
        auto it = cassette_.find(fingerprint);
        if (it != cassette_.end()) return extract_assistant_text(it->second);
        if (opt_.mode == CassetteMode::replay) throw CassetteMissError(fingerprint);
    }

    // live, or record with a cassette miss: perform the network call with a
    // bounded number of in-flight requests.
    {
        std::unique_lock lock(mutex_);
        slot_cv_.wait(lock, [&] { return inflight_ < opt_.max_inflight; });
        ++inflight_;
    }
    std::string body;
    try {
        body = perform_network(canonical_request_body(req));
    } catch (...) {
        std::lock_guard lock(mutex_);
        --inflight_;
        slot_cv_.notify_one();
        throw;
    }
    {
        std::lock_guard lock(mutex_);
        --inflight_;
        ++network_calls_;
        slot_cv_.notify_one();
        if (opt_.mode == CassetteMode::record) {
            // Double-check: another thread may have recorded it meanwhile.
            auto [it, inserted] = cassette_.emplace(fingerprint, body);
            if (inserted) append_cassette_entry(fingerprint, body);
        }
    }
    return extract_assistant_text(body);
}

}  // namespace pub
