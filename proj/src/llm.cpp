#include "wflow/llm.hpp"

#include <thread>

#include "json.hpp"
#include "wflow/util.hpp"

#define CPPHTTPLIB_NO_EXCEPTIONS
#include "httplib.h"

namespace wflow::llm {

using nlohmann::json;

const char* role_name(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

void CostLedger::add(const std::string& model_id, double cost_usd, const std::string& tag) {
    std::lock_guard<std::mutex> lock(mu_);
    entries_.push_back({std::chrono::system_clock::now(), model_id, cost_usd, tag});
}

double CostLedger::total() const {
    std::lock_guard<std::mutex> lock(mu_);
    double t = 0.0;
    for (const auto& e : entries_) t += e.cost_usd;
    return t;
}

double CostLedger::total_for(const std::string& tag) const {
    std::lock_guard<std::mutex> lock(mu_);
    double t = 0.0;
    for (const auto& e : entries_)
        if (e.tag == tag) t += e.cost_usd;
    return t;
}

size_t CostLedger::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
}

std::vector<LedgerEntry> CostLedger::snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_;
}

void CostLedger::write_csv(std::ostream& out) const {
    out << "timestamp_ms,model_id,cost_usd,tag\n";
    for (const auto& e : snapshot()) {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(e.at.time_since_epoch());
        out << ms.count() << "," << e.model_id << "," << strf("%.10f", e.cost_usd) << "," << e.tag
            << "\n";
    }
}

ScriptedBackend::ScriptedBackend(std::vector<std::string> script, ExhaustMode mode)
    : script_(std::move(script)), mode_(mode) {
    if (script_.empty()) throw InvalidRequestError("scripted backend needs a non-empty script");
}

long ScriptedBackend::count_tokens(const std::string& text) {
    return static_cast<long>((text.size() + 3) / 4);
}

BackendReply ScriptedBackend::complete(const ChatRequest& request) {
    std::string text;
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (next_ >= script_.size()) {
            if (mode_ == ExhaustMode::Error)
                throw ScriptExhaustedError(
                    strf("script exhausted after %zu calls", script_.size()));
            text = script_.back();
        } else {
            text = script_[next_];
        }
        ++next_;
    }
    long prompt_tokens = 0;
    for (const auto& m : request.messages) prompt_tokens += count_tokens(m.text);
    return {text, prompt_tokens, count_tokens(text)};
}

size_t ScriptedBackend::calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return next_;
}

std::shared_ptr<ChatBackend> scripted_mock(std::vector<std::string> script, ExhaustMode mode) {
    return std::make_shared<ScriptedBackend>(std::move(script), mode);
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw InvalidRequestError("endpoint must be a full URL: " + url);
    size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        host_ = url;
        path_ = "/v1/chat/completions";
    } else {
        host_ = url.substr(0, path_start);
        path_ = url.substr(path_start);
    }
}

std::string HttpBackend::request_body(const ChatRequest& request) {
    json body;
    body["model"] = request.model_id;
    body["temperature"] = request.temperature;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;
    body["messages"] = json::array();
    for (const auto& m : request.messages)
        body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.text}});
    return body.dump();
}

BackendReply HttpBackend::parse_body(const std::string& body) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw MalformedResponseError("backend returned invalid JSON");
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
        throw MalformedResponseError("backend reply has no choices");
    const json& msg = j["choices"][0].value("message", json::object());
    std::string text = msg.value("content", std::string());
    BackendReply reply;
    reply.text = text;
    if (j.contains("usage")) {
        reply.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
        reply.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    return reply;
}

BackendReply HttpBackend::complete(const ChatRequest& request) {
    httplib::Client client(host_);
    client.set_connection_timeout(config_.connect_timeout_s, 0);
    client.set_read_timeout(config_.read_timeout_s, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path_, headers, request_body(request), "application/json");
    if (!res)
        throw TransportError("http request failed: " + httplib::to_string(res.error()));
    if (res->status >= 500 || res->status == 429)
        throw TransportError(strf("http status %d", res->status));
    if (res->status != 200)
        throw MalformedResponseError(strf("http status %d: %s", res->status, res->body.c_str()));
    return parse_body(res->body);
}

ChatResponse Gateway::complete(const ChatRequest& request, ChatBackend& backend,
                               const std::string& tag) {
    if (request.messages.empty())
        throw InvalidRequestError("chat request must contain at least one message");
    if (request.temperature < 0.0)
        throw InvalidRequestError("temperature must be >= 0");

    BackendReply reply;
    auto backoff = retry_.initial_backoff;
    int attempt = 0;
    while (true) {
        ++attempt;
        try {
            reply = backend.complete(request);
            break;
        } catch (const TransportError&) {
            if (attempt >= retry_.attempts) throw;
            std::this_thread::sleep_for(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long>(static_cast<double>(backoff.count()) * retry_.multiplier));
        }
    }
    if (reply.text.empty()) throw MalformedResponseError("backend returned no text");

    ChatResponse response;
    response.text = reply.text;
    response.prompt_tokens = reply.prompt_tokens;
    response.completion_tokens = reply.completion_tokens;
    response.cost_usd =
        prices_.cost_usd(request.model_id, reply.prompt_tokens, reply.completion_tokens);
    ledger_.add(request.model_id, response.cost_usd, tag);
    return response;
}

}  // namespace wflow::llm
