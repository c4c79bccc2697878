#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wflow/bench.hpp"
#include "wflow/dsl.hpp"
#include "wflow/rng.hpp"

namespace wflow::mcts {

struct SearchConfig {
    int top_k = 5;             // parent candidates per selection
    double lambda = 0.3;       // uniform mixing weight
    double alpha = 0.2;        // Boltzmann temperature
    double epsilon = 0.02;     // outcome significance threshold
    int validation_runs = 5;   // V
    int max_rounds = 20;       // T, mutation rounds after the seed
    int convergence_k = 3;     // top-k for the convergence statistic
    int patience = 5;          // C, consecutive no-improvement rounds
    double z = 0.0;            // significance level
    double tau_high = 0.65;    // critic conservative threshold
    double tau_mid = 0.50;     // critic moderate threshold
    int max_edit = 5;          // statement-diff budget per mutation
    int propose_attempts = 3;  // re-asks on unparsable optimizer replies
    int reject_retries = 3;    // selection retries after a blocked mutation
};

enum class OutcomeClass { Success, Neutral, Failure };
const char* outcome_name(OutcomeClass c);

OutcomeClass classify_outcome(double s_new, double s_parent, double epsilon);

struct ChildRecord {
    int round = 0;
    std::string modification;
    double score = 0.0;
    OutcomeClass cls = OutcomeClass::Neutral;
};

struct DiagCounts {
    int format = 0;
    int unit = 0;
    int value = 0;
    int total() const { return format + unit + value; }
};

struct SearchNode {
    int round = 0;
    dsl::WorkflowProgram program;
    double median_score = 0.0;
    std::vector<double> per_run_scores;
    int parent_round = 0;  // 0 = none
    std::string modification;
    std::vector<ChildRecord> children;
    DiagCounts diag_counts;

    int attempts() const { return static_cast<int>(children.size()); }
    int successes() const;
    int failures() const;
    bool saturated() const { return failures() >= 2 && successes() == 0; }
    double score_stddev() const;  // sample stddev of the per-run scores
};

class ExperienceTree {
public:
    SearchNode& add(SearchNode node);
    SearchNode* find(int round);
    const SearchNode* find(int round) const;
    const std::map<int, SearchNode>& nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }
    int max_round() const;

    // top-K rounds by median score, ties broken by the earlier round
    std::vector<int> top_rounds(int k) const;
    int best_round() const;  // argmax median, ties to the earlier round

    void record_child(int parent_round, const ChildRecord& child);
    bool modification_blacklisted(const std::string& modification) const;

    nlohmann::json to_json() const;
    static ExperienceTree from_json(const nlohmann::json& doc);

    // the per-round score plus success/failure/neutral maps handed to the
    // optimizer model
    std::string formatted_experience() const;

private:
    std::map<int, SearchNode> nodes_;
};

// exploration penalty from the node's mutation history
double penalty(const SearchNode& node);

// mixture of a uniform floor and a penalized Boltzmann distribution
std::vector<double> selection_probabilities(const std::vector<const SearchNode*>& candidates,
                                            const SearchConfig& cfg);
int select_index(const std::vector<const SearchNode*>& candidates, const SearchConfig& cfg,
                 Rng& rng);

// --- critic -------------------------------------------------------------------

struct CriticReport {
    enum class Mode { UltraConservative, Conservative, Moderate, Aggressive };
    Mode mode = Mode::Aggressive;
    double score = 0.0;
    int round = 0;
    DiagCounts errors;
    int steps = 0;
    bool has_tool_agent = false;
    bool has_ensemble = false;
    int conditionals = 0;
    int custom_calls = 0;
    bool overengineered = false;
    int attempts = 0, successes = 0, failures = 0;
    bool saturated = false;
    std::vector<std::string> allowed;
    std::vector<std::string> forbidden;

    std::string render() const;
};

const char* critic_mode_name(CriticReport::Mode mode);
CriticReport run_critic(const SearchNode& node, const SearchConfig& cfg);

// --- mutation proposals ---------------------------------------------------------

struct ModificationProposal {
    std::string modification;
    dsl::WorkflowProgram program;
    std::string program_source;
    int diff_count = 0;
};

struct ProposeOutcome {
    std::optional<ModificationProposal> proposal;
    std::string failure_reason;  // set when proposal is empty
    int llm_calls = 0;
};

ProposeOutcome propose_mutation(const SearchNode& parent, const ExperienceTree& tree,
                                const CriticReport& critic, const std::string& task_name,
                                const std::vector<std::string>& recent_error_log,
                                llm::Gateway& gateway, llm::ChatBackend& optimizer_backend,
                                const SearchConfig& cfg, const std::string& optimizer_model_id);

// structural predicates over programs, loaded from a data file
class HarmfulPatterns {
public:
    static HarmfulPatterns load(const std::string& json_path);
    static HarmfulPatterns from_json_text(const std::string& text);
    // reason when the program matches a harmful pattern
    std::optional<std::string> match(const dsl::WorkflowProgram& program) const;
    size_t size() const { return patterns_.size(); }

private:
    struct Pattern {
        std::string name;
        std::string type;  // empty_program | conditional_terminal | operator_count_exceeds
        std::string op;
        int max = 0;
    };
    std::vector<Pattern> patterns_;
};

// false iff the modification repeats a blacklisted failure or the program
// matches a harmful pattern
bool check_modification(const ModificationProposal& proposal, const ExperienceTree& tree,
                        const HarmfulPatterns& patterns, std::string* reason = nullptr);

// --- convergence ---------------------------------------------------------------

struct ConvergenceEntry {
    int round = 0;
    double mean_topk = 0.0;
    double sigma = 0.0;
    double delta = 0.0;
    double sigma_delta = 0.0;
    bool no_improvement = false;
    int streak = 0;
};

class ConvergenceTracker {
public:
    void add_round(int round, const ExperienceTree& tree, const SearchConfig& cfg);
    bool converged(const SearchConfig& cfg) const;
    const std::vector<ConvergenceEntry>& history() const { return history_; }

private:
    std::vector<ConvergenceEntry> history_;
};

// --- the search loop -------------------------------------------------------------

struct OptimizeHooks {
    // called after every loop round (evaluated or skipped) with the tree state
    std::function<void(int round, const ExperienceTree& tree,
                       const ConvergenceTracker& tracker)> on_round;
    // called right after a round's evaluation with the full evaluation record
    std::function<void(int round, const bench::EvalResult& eval, const CriticReport* critic)>
        on_evaluated;
};

struct OptimizeConfig {
    SearchConfig search;
    std::string task_name = "wireless";
    std::string optimizer_model_id = "optimizer";
    HarmfulPatterns harmful_patterns;
    bench::EvalOptions eval;
};

struct RoundRecord {
    int round = 0;
    bool evaluated = false;
    bool skipped = false;
    std::string skip_reason;
    int parent_round = 0;
    double median_score = 0.0;
};

struct OptimizeResult {
    int best_round = 0;
    ExperienceTree tree;
    ConvergenceTracker tracker;
    std::vector<RoundRecord> rounds;
    bool converged_early = false;
};

// Algorithm: evaluate the seed, then loop select -> critic -> propose ->
// check -> evaluate -> classify -> record until the round budget or the
// convergence criterion stops it. The tree passed in may already hold rounds
// (resume); the loop continues after the highest existing round.
OptimizeResult optimize(const dsl::WorkflowProgram& seed,
                        const std::vector<bench::Problem>& problems,
                        dsl::ExecutionContext& executor_ctx, llm::ChatBackend& optimizer_backend,
                        const OptimizeConfig& cfg, uint64_t seed_value,
                        ExperienceTree resume_tree = {}, const OptimizeHooks& hooks = {});

DiagCounts count_diags(const std::vector<bench::Diag>& diags);

}  // namespace wflow::mcts
