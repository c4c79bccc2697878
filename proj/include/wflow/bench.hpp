#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wflow/channel.hpp"
#include "wflow/dsl.hpp"
#include "wflow/rng.hpp"

namespace wflow::bench {

enum class Benchmark { WCHW, WCNS, WCMSA };

const char* benchmark_name(Benchmark b);
std::optional<Benchmark> benchmark_from_name(const std::string& name);

struct Problem {
    std::string id;
    Benchmark benchmark = Benchmark::WCHW;
    std::string question;
    std::string reference_text;   // rendered reference answer
    nlohmann::json reference;     // typed record
    std::string cot;
    nlohmann::json metadata;

    nlohmann::json to_json() const;
    static Problem from_json(const nlohmann::json& doc);
};

std::vector<Problem> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<Problem>& problems);

// --- answer formats and units ----------------------------------------------

enum class AnswerFormat {
    PureNumeric,
    NumericWithUnit,
    Scientific,
    Formula,
    Percentage,
    TextShort,
    TextLong,
    CodeSequence,
    Ratio,
};

const char* format_name(AnswerFormat f);
AnswerFormat classify_format(const std::string& reference);

struct UnitValue {
    double value = 0.0;        // in base SI units of its dimension
    std::string dimension;     // "frequency", "data_rate", ... or "dimensionless"
    bool recognized = false;
};

UnitValue normalize_units(double value, const std::string& unit);
size_t unit_table_size();

struct NumberWithUnit {
    double value = 0.0;
    std::string unit;  // empty when bare
};
std::vector<NumberWithUnit> extract_numbers(const std::string& text);

// --- scoring -----------------------------------------------------------------

struct SubScore {
    double score = 0.0;
    double weight = 0.0;
};

struct Diag {
    std::string category;  // "format" | "unit" | "value"
    std::string field;
    std::string message;
};

struct ScoreReport {
    double overall = 0.0;
    std::map<std::string, SubScore> sub_scores;
    std::map<std::string, double> strategy_scores;  // multi-strategy raw scores
    std::vector<Diag> diagnostics;
    nlohmann::json to_json() const;
};

ScoreReport score_wchw(const std::string& candidate, const std::string& reference);
ScoreReport score_wcns(const std::string& candidate, const nlohmann::json& reference);
ScoreReport score_wcmsa(const std::string& candidate, const nlohmann::json& reference);
ScoreReport score_problem(const Problem& problem, const std::string& candidate);

// numeric comparison tiers shared by the composite scorers
double relative_error_tier(double candidate, double reference);

// --- service banks -----------------------------------------------------------

struct ServiceTemplate {
    std::string text;
    std::string slice;  // "eMBB" | "URLLC"
};
const std::vector<ServiceTemplate>& wcns_service_bank();  // 15 + 15 request templates

struct ServiceType {
    std::string name;
    std::string slice;
    double min_rate_mbps = 0.0;
};
const std::vector<ServiceType>& wcmsa_service_types();  // the 20 assured services

struct SlicePolicy {
    double capacity_mhz = 0.0;
    double min_mhz = 0.0;
    double max_mhz = 0.0;
};
SlicePolicy slice_policy(const std::string& slice);
double allocate_bandwidth_mhz(const std::string& slice, int existing_users);

// --- generators ---------------------------------------------------------------

std::vector<Problem> generate_wchw(int count, uint64_t seed);
std::vector<Problem> generate_wcns(const channel::ChannelScene& scene, int count, uint64_t seed);
std::vector<Problem> generate_wcmsa(const channel::ChannelScene& scene, int count, uint64_t seed);

// Deterministic solver over problem metadata; formats a full answer. The
// scene must match the problem's region for WCNS/WCMSA. use_kalman replaces
// the ground-truth next position with the filter prediction (WCMSA only).
std::string rule_based_oracle(const Problem& problem, const channel::ChannelScene* scene,
                              bool use_kalman = false);

// --- evaluation ---------------------------------------------------------------

struct EvalOptions {
    int runs = 5;
    int jobs = 1;
    uint64_t base_seed = 0;
};

struct RunLogEntry {
    std::string problem_id;
    int run = 0;
    double score = 0.0;
    std::string answer;
    double cost_usd = 0.0;
    std::string error;
};

struct EvalResult {
    double median_score = 0.0;
    std::vector<double> per_run_scores;
    double total_cost_usd = 0.0;
    std::vector<RunLogEntry> logs;
    std::vector<Diag> diagnostics;                // aggregated over all runs
    std::map<std::string, double> metric_means;   // mean sub-score per metric
};

double median(std::vector<double> values);

EvalResult evaluate_workflow(const dsl::WorkflowProgram& program,
                             const std::vector<Problem>& problems, dsl::ExecutionContext& ctx,
                             const EvalOptions& options);

// evaluation with the deterministic oracle standing in for the workflow
EvalResult evaluate_oracle(const std::vector<Problem>& problems,
                           const channel::ChannelScene* scene, bool use_kalman,
                           const EvalOptions& options);

}  // namespace wflow::bench
