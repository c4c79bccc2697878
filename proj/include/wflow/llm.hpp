#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wflow::llm {

enum class Role { System, User, Assistant };

const char* role_name(Role r);

struct Message {
    Role role = Role::User;
    std::string text;
};

struct ChatRequest {
    std::string model_id;
    std::vector<Message> messages;
    double temperature = 0.0;
    std::optional<int> max_tokens;
};

struct ChatResponse {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
    double cost_usd = 0.0;
};

// Prices are USD per million tokens.
struct ModelPrice {
    double usd_per_mtok_in = 0.0;
    double usd_per_mtok_out = 0.0;
};

class PriceTable {
public:
    void set(const std::string& model_id, ModelPrice price) { prices_[model_id] = price; }
    ModelPrice lookup(const std::string& model_id) const {
        auto it = prices_.find(model_id);
        return it == prices_.end() ? ModelPrice{} : it->second;
    }
    double cost_usd(const std::string& model_id, long prompt_tokens, long completion_tokens) const {
        ModelPrice p = lookup(model_id);
        return static_cast<double>(prompt_tokens) / 1e6 * p.usd_per_mtok_in +
               static_cast<double>(completion_tokens) / 1e6 * p.usd_per_mtok_out;
    }

private:
    std::map<std::string, ModelPrice> prices_;
};

struct LedgerEntry {
    std::chrono::system_clock::time_point at;
    std::string model_id;
    double cost_usd = 0.0;
    std::string tag;
};

// Append-only cost log; appends are serialized so concurrent evaluation
// workers can share one ledger.
class CostLedger {
public:
    void add(const std::string& model_id, double cost_usd, const std::string& tag);
    double total() const;
    double total_for(const std::string& tag) const;
    size_t size() const;
    std::vector<LedgerEntry> snapshot() const;
    void write_csv(std::ostream& out) const;

private:
    mutable std::mutex mu_;
    std::vector<LedgerEntry> entries_;
};

struct BackendReply {
    std::string text;
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

class InvalidRequestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class MalformedResponseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class ScriptExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual BackendReply complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

enum class ExhaustMode { RepeatLast, Error };

// Deterministic backend: the k-th call returns the k-th script entry.
// Token counts are derived from character counts (4 chars per token).
class ScriptedBackend : public ChatBackend {
public:
    explicit ScriptedBackend(std::vector<std::string> script,
                             ExhaustMode mode = ExhaustMode::RepeatLast);
    BackendReply complete(const ChatRequest& request) override;
    std::string name() const override { return "scripted"; }
    size_t calls() const;

    static long count_tokens(const std::string& text);

private:
    std::vector<std::string> script_;
    ExhaustMode mode_;
    mutable std::mutex mu_;
    size_t next_ = 0;
};

std::shared_ptr<ChatBackend> scripted_mock(std::vector<std::string> script,
                                           ExhaustMode mode = ExhaustMode::RepeatLast);

struct HttpBackendConfig {
    std::string endpoint;  // e.g. http://host:port/v1/chat/completions
    std::string api_key;
    int connect_timeout_s = 10;
    int read_timeout_s = 120;
};

// Chat-completions JSON over HTTP (messages array in, choices array out).
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    BackendReply complete(const ChatRequest& request) override;
    std::string name() const override { return "http"; }

    // exposed for tests
    static std::string request_body(const ChatRequest& request);
    static BackendReply parse_body(const std::string& body);

private:
    HttpBackendConfig config_;
    std::string host_;  // scheme://host:port
    std::string path_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};
    double multiplier = 2.0;
};

// Uniform entry point: validates the request, retries transient transport
// failures, prices the reply, and records it in the ledger.
class Gateway {
public:
    Gateway() = default;
    explicit Gateway(PriceTable prices, RetryPolicy retry = {})
        : prices_(std::move(prices)), retry_(retry) {}

    ChatResponse complete(const ChatRequest& request, ChatBackend& backend,
                          const std::string& tag = "");

    CostLedger& ledger() { return ledger_; }
    const CostLedger& ledger() const { return ledger_; }
    const PriceTable& prices() const { return prices_; }
    void set_prices(PriceTable p) { prices_ = std::move(p); }
    void set_retry(RetryPolicy r) { retry_ = r; }

private:
    PriceTable prices_;
    RetryPolicy retry_;
    CostLedger ledger_;
};

}  // namespace wflow::llm
