#include "wflow/mcts.hpp"

#include <algorithm>
#include <cmath>

#include "wflow/prompts.hpp"
#include "wflow/util.hpp"

namespace wflow::mcts {

using nlohmann::json;

const char* outcome_name(OutcomeClass c) {
    switch (c) {
        case OutcomeClass::Success: return "success";
        case OutcomeClass::Neutral: return "neutral";
        case OutcomeClass::Failure: return "failure";
    }
    return "neutral";
}

OutcomeClass classify_outcome(double s_new, double s_parent, double epsilon) {
    double delta = s_new - s_parent;
    if (delta > epsilon) return OutcomeClass::Success;
    if (delta < -epsilon) return OutcomeClass::Failure;
    return OutcomeClass::Neutral;
}

int SearchNode::successes() const {
    int n = 0;
    for (const auto& c : children) n += c.cls == OutcomeClass::Success;
    return n;
}

int SearchNode::failures() const {
    int n = 0;
    for (const auto& c : children) n += c.cls == OutcomeClass::Failure;
    return n;
}

double SearchNode::score_stddev() const {
    size_t n = per_run_scores.size();
    if (n < 2) return 0.0;
    double mean = 0.0;
    for (double s : per_run_scores) mean += s;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double s : per_run_scores) ss += (s - mean) * (s - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

SearchNode& ExperienceTree::add(SearchNode node) {
    int round = node.round;
    return nodes_[round] = std::move(node);
}

SearchNode* ExperienceTree::find(int round) {
    auto it = nodes_.find(round);
    return it == nodes_.end() ? nullptr : &it->second;
}

const SearchNode* ExperienceTree::find(int round) const {
    auto it = nodes_.find(round);
    return it == nodes_.end() ? nullptr : &it->second;
}

int ExperienceTree::max_round() const {
    return nodes_.empty() ? 0 : nodes_.rbegin()->first;
}

std::vector<int> ExperienceTree::top_rounds(int k) const {
    std::vector<const SearchNode*> all;
    for (const auto& [round, node] : nodes_) {
        (void)round;
        all.push_back(&node);
    }
    std::sort(all.begin(), all.end(), [](const SearchNode* a, const SearchNode* b) {
        if (a->median_score != b->median_score) return a->median_score > b->median_score;
        return a->round < b->round;
    });
    std::vector<int> out;
    for (const auto* node : all) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back(node->round);
    }
    return out;
}

int ExperienceTree::best_round() const {
    auto top = top_rounds(1);
    return top.empty() ? 0 : top[0];
}

void ExperienceTree::record_child(int parent_round, const ChildRecord& child) {
    SearchNode* parent = find(parent_round);
    if (parent) parent->children.push_back(child);
}

bool ExperienceTree::modification_blacklisted(const std::string& modification) const {
    for (const auto& [round, node] : nodes_) {
        (void)round;
        for (const auto& child : node.children)
            if (child.cls == OutcomeClass::Failure && child.modification == modification)
                return true;
    }
    return false;
}

json ExperienceTree::to_json() const {
    json doc = json::object();
    for (const auto& [round, node] : nodes_) {
        json entry;
        entry["score"] = node.median_score;
        entry["per_run_scores"] = node.per_run_scores;
        entry["parent"] = node.parent_round;
        entry["modification"] = node.modification;
        entry["program"] = dsl::serialize(node.program);
        entry["diag_counts"] = {{"format", node.diag_counts.format},
                                {"unit", node.diag_counts.unit},
                                {"value", node.diag_counts.value}};
        json success = json::object(), failure = json::object(), neutral = json::object();
        for (const auto& child : node.children) {
            json c = {{"modification", child.modification}, {"score", child.score}};
            std::string key = strf("%d", child.round);
            if (child.cls == OutcomeClass::Success)
                success[key] = c;
            else if (child.cls == OutcomeClass::Failure)
                failure[key] = c;
            else
                neutral[key] = c;
        }
        entry["success"] = success;
        entry["failure"] = failure;
        entry["neutral"] = neutral;
        doc[strf("%d", round)] = entry;
    }
    return doc;
}

ExperienceTree ExperienceTree::from_json(const json& doc) {
    ExperienceTree tree;
    for (const auto& kv : doc.items()) {
        const json& entry = kv.value();
        SearchNode node;
        node.round = std::stoi(kv.key());
        node.median_score = entry.value("score", 0.0);
        if (entry.contains("per_run_scores"))
            node.per_run_scores = entry["per_run_scores"].get<std::vector<double>>();
        node.parent_round = entry.value("parent", 0);
        node.modification = entry.value("modification", std::string());
        if (entry.contains("program")) node.program = dsl::parse(entry["program"].get<std::string>());
        if (entry.contains("diag_counts")) {
            node.diag_counts.format = entry["diag_counts"].value("format", 0);
            node.diag_counts.unit = entry["diag_counts"].value("unit", 0);
            node.diag_counts.value = entry["diag_counts"].value("value", 0);
        }
        auto load_children = [&](const char* key, OutcomeClass cls) {
            json children_map = entry.value(key, json::object());
            for (const auto& ckv : children_map.items()) {
                ChildRecord child;
                child.round = std::stoi(ckv.key());
                child.modification = ckv.value().value("modification", std::string());
                child.score = ckv.value().value("score", 0.0);
                child.cls = cls;
                node.children.push_back(child);
            }
        };
        load_children("success", OutcomeClass::Success);
        load_children("failure", OutcomeClass::Failure);
        load_children("neutral", OutcomeClass::Neutral);
        std::sort(node.children.begin(), node.children.end(),
                  [](const ChildRecord& a, const ChildRecord& b) { return a.round < b.round; });
        tree.add(std::move(node));
    }
    return tree;
}

std::string ExperienceTree::formatted_experience() const {
    json doc = json::object();
    for (const auto& [round, node] : nodes_) {
        json entry;
        entry["score"] = node.median_score;
        json success = json::object(), failure = json::object(), neutral = json::object();
        for (const auto& child : node.children) {
            json c = {{"modification", child.modification}, {"score", child.score}};
            std::string key = strf("%d", child.round);
            if (child.cls == OutcomeClass::Success)
                success[key] = c;
            else if (child.cls == OutcomeClass::Failure)
                failure[key] = c;
            else
                neutral[key] = c;
        }
        entry["success"] = success;
        entry["failure"] = failure;
        entry["neutral"] = neutral;
        doc[strf("%d", round)] = entry;
    }
    return doc.dump(2);
}

// --- selection ---------------------------------------------------------------------

double penalty(const SearchNode& node) {
    int total = node.attempts();
    if (total == 0) return 1.0;  // childless: neutral prior
    double r_fail = static_cast<double>(node.failures()) / total;
    double r_succ = static_cast<double>(node.successes()) / total;
    double gamma = total >= 3 ? 0.8 : 1.0;
    double base = std::min(1.3, 1.0 - 0.7 * r_fail + 0.2 * r_succ);
    return std::max(0.1, base * gamma);
}

std::vector<double> selection_probabilities(const std::vector<const SearchNode*>& candidates,
                                            const SearchConfig& cfg) {
    size_t k = candidates.size();
    std::vector<double> probs(k, 0.0);
    if (k == 0) return probs;
    double max_score = candidates[0]->median_score;
    for (const auto* node : candidates) max_score = std::max(max_score, node->median_score);
    double denom = 0.0;
    std::vector<double> weights(k);
    for (size_t i = 0; i < k; ++i) {
        double shifted = candidates[i]->median_score - max_score;
        weights[i] = penalty(*candidates[i]) * std::exp(cfg.alpha * shifted);
        denom += weights[i];
    }
    for (size_t i = 0; i < k; ++i)
        probs[i] = cfg.lambda / static_cast<double>(k) +
                   (1.0 - cfg.lambda) * (denom > 0.0 ? weights[i] / denom : 1.0 / k);
    return probs;
}

int select_index(const std::vector<const SearchNode*>& candidates, const SearchConfig& cfg,
                 Rng& rng) {
    std::vector<double> probs = selection_probabilities(candidates, cfg);
    double u = rng.uniform01();
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
}

// --- harmful patterns -----------------------------------------------------------------

HarmfulPatterns HarmfulPatterns::from_json_text(const std::string& text) {
    HarmfulPatterns out;
    json doc = json::parse(text);
    for (const auto& p : doc.value("patterns", json::array())) {
        Pattern pattern;
        pattern.name = p.at("name").get<std::string>();
        pattern.type = p.at("type").get<std::string>();
        pattern.op = p.value("operator", std::string());
        pattern.max = p.value("max", 0);
        out.patterns_.push_back(std::move(pattern));
    }
    return out;
}

HarmfulPatterns HarmfulPatterns::load(const std::string& json_path) {
    return from_json_text(read_file(json_path));
}

std::optional<std::string> HarmfulPatterns::match(const dsl::WorkflowProgram& program) const {
    for (const auto& p : patterns_) {
        if (p.type == "empty_program") {
            if (program.nodes.empty()) return p.name;
        } else if (p.type == "conditional_terminal") {
            const dsl::Statement* terminal = program.terminal();
            if (terminal && terminal->condition) return p.name;
        } else if (p.type == "operator_count_exceeds") {
            auto kind = dsl::operator_from_name(p.op);
            if (!kind) continue;
            int count = 0;
            for (const auto& stmt : program.nodes) count += stmt.op == *kind;
            if (count > p.max) return p.name;
        }
    }
    return std::nullopt;
}

bool check_modification(const ModificationProposal& proposal, const ExperienceTree& tree,
                        const HarmfulPatterns& patterns, std::string* reason) {
    if (tree.modification_blacklisted(proposal.modification)) {
        if (reason) *reason = "modification repeats a blacklisted failure";
        return false;
    }
    if (auto matched = patterns.match(proposal.program)) {
        if (reason) *reason = "program matches harmful pattern '" + *matched + "'";
        return false;
    }
    return true;
}

// --- mutation proposals -----------------------------------------------------------------

namespace {

std::optional<std::string> find_tag(const std::string& text, const std::string& tag) {
    std::string open = "<" + tag + ">";
    std::string close = "</" + tag + ">";
    size_t start = text.find(open);
    if (start == std::string::npos) return std::nullopt;
    start += open.size();
    size_t end = text.find(close, start);
    if (end == std::string::npos) return std::nullopt;
    return text.substr(start, end - start);
}

std::string render_prompt_slots(const dsl::WorkflowProgram& program) {
    std::string out;
    for (const auto& [name, text] : program.prompt_slots)
        out += "prompt " + name + " = \"\"\"" + text + "\"\"\"\n";
    return out;
}

std::string render_graph_only(const dsl::WorkflowProgram& program) {
    // the statement section without prompt definitions
    std::string out;
    for (const auto& line : split(dsl::serialize(program), '\n')) {
        if (starts_with(line, "prompt ")) continue;
        if (trim(line).empty()) continue;
        out += line + "\n";
    }
    return out;
}

std::string operator_catalog() {
    return R"(custom(input, prompt): one model call with the slot text as instruction
tool_agent(input, strategy, max_steps): reason-act loop over the registered tools
code_level(tool, input): deterministic tool call injected into the text, no model cost
sc_ensemble(solutions, question): pick the most consistent of several solutions
md_ensemble(solutions, question): five shuffled majority votes
programmer(problem, analysis): generate and run a program, up to 3 attempts
review(problem, solution): boolean verdict plus feedback
revise(problem, solution, feedback): rewrite a rejected solution
test(problem, solution, cases): run tests with up to 3 reflection loops
answer_generate(input): structured thought plus answer
format(input, instruction): reformat to the expected output shape
answer_validator(input): rule-plus-model answer check
registered tools: ray_tracing(x, y[, region]), kalman_predictor(positions), telecom_calculator(operation, ...), formula_retriever(query[, k]))";
}

}  // namespace

ProposeOutcome propose_mutation(const SearchNode& parent, const ExperienceTree& tree,
                                const CriticReport& critic, const std::string& task_name,
                                const std::vector<std::string>& recent_error_log,
                                llm::Gateway& gateway, llm::ChatBackend& optimizer_backend,
                                const SearchConfig& cfg, const std::string& optimizer_model_id) {
    ProposeOutcome outcome;
    std::string score_text = strf("%.4f", parent.median_score);
    std::string log_text;
    for (const auto& line : recent_error_log) log_text += line + "\n";
    if (log_text.empty()) log_text = "(none)";

    std::string system_text =
        prompts::fill(prompts::optimize_system_template(), {{"type", task_name}});
    std::string input_text = prompts::fill(
        prompts::optimize_input_template(),
        {{"experience", tree.formatted_experience()},
         {"score", score_text},
         {"graph", render_graph_only(parent.program)},
         {"prompt", render_prompt_slots(parent.program)},
         {"operator_description", operator_catalog()},
         {"log", log_text}});

    llm::ChatRequest request;
    request.model_id = optimizer_model_id;
    request.temperature = 0.0;
    request.messages = {{llm::Role::System, system_text},
                        {llm::Role::User, input_text + "\n\n" + critic.render()}};

    for (int attempt = 1; attempt <= cfg.propose_attempts; ++attempt) {
        llm::ChatResponse response;
        try {
            response = gateway.complete(request, optimizer_backend, "optimizer");
        } catch (const std::exception& e) {
            outcome.failure_reason = std::string("optimizer backend error: ") + e.what();
            return outcome;
        }
        ++outcome.llm_calls;

        std::string problem_text;
        auto modification = find_tag(response.text, "modification");
        auto graph = find_tag(response.text, "graph");
        if (!modification || trim(*modification).empty())
            problem_text = "reply is missing the <modification> tag";
        else if (!graph || trim(*graph).empty())
            problem_text = "reply is missing the <graph> tag";

        ModificationProposal proposal;
        if (problem_text.empty()) {
            auto prompt_block = find_tag(response.text, "prompt");
            std::string source = (prompt_block ? *prompt_block + "\n" : "") + *graph + "\n";
            try {
                proposal.program = dsl::parse(source);
                proposal.program_source = dsl::serialize(proposal.program);
                proposal.modification = trim(*modification);
                proposal.diff_count = dsl::statement_diff(parent.program, proposal.program);
                if (proposal.diff_count > cfg.max_edit)
                    problem_text = strf("modification touches %d statements; at most %d allowed",
                                        proposal.diff_count, cfg.max_edit);
            } catch (const dsl::ParseError& e) {
                problem_text = std::string("graph does not parse: ") + e.what();
            }
        }

        if (problem_text.empty()) {
            outcome.proposal = std::move(proposal);
            return outcome;
        }
        outcome.failure_reason = problem_text;
        request.messages.push_back({llm::Role::Assistant, response.text});
        request.messages.push_back(
            {llm::Role::User,
             "That reply was rejected: " + problem_text +
                 ". Reply again with <modification>, <graph>, and <prompt> tags."});
    }
    return outcome;
}

// --- convergence ---------------------------------------------------------------------

void ConvergenceTracker::add_round(int round, const ExperienceTree& tree,
                                   const SearchConfig& cfg) {
    ConvergenceEntry entry;
    entry.round = round;
    std::vector<int> top = tree.top_rounds(cfg.convergence_k);
    if (top.empty()) return;
    double mean = 0.0, var_sum = 0.0;
    for (int r : top) {
        const SearchNode* node = tree.find(r);
        mean += node->median_score;
        double sd = node->score_stddev();
        var_sum += sd * sd;
    }
    double k = static_cast<double>(top.size());
    entry.mean_topk = mean / k;
    entry.sigma = std::sqrt(var_sum / (k * k));
    if (!history_.empty()) {
        const ConvergenceEntry& prev = history_.back();
        entry.delta = entry.mean_topk - prev.mean_topk;
        entry.sigma_delta = std::sqrt(entry.sigma * entry.sigma + prev.sigma * prev.sigma);
        entry.no_improvement = entry.delta <= cfg.z * entry.sigma_delta;
        entry.streak = entry.no_improvement ? prev.streak + 1 : 0;
    }
    history_.push_back(entry);
}

bool ConvergenceTracker::converged(const SearchConfig& cfg) const {
    return !history_.empty() && history_.back().streak >= cfg.patience;
}

// --- the loop ---------------------------------------------------------------------------

DiagCounts count_diags(const std::vector<bench::Diag>& diags) {
    DiagCounts counts;
    for (const auto& d : diags) {
        if (d.category == "format")
            ++counts.format;
        else if (d.category == "unit")
            ++counts.unit;
        else
            ++counts.value;
    }
    return counts;
}

namespace {

std::vector<std::string> recent_errors(const bench::EvalResult& eval, size_t limit = 10) {
    std::vector<std::string> out;
    for (const auto& entry : eval.logs) {
        if (out.size() >= limit) break;
        if (!entry.error.empty())
            out.push_back(entry.problem_id + ": " + entry.error);
        else if (entry.score < 0.5)
            out.push_back(strf("%s: score %.2f, answer: %.120s", entry.problem_id.c_str(),
                               entry.score, entry.answer.c_str()));
    }
    return out;
}

}  // namespace

OptimizeResult optimize(const dsl::WorkflowProgram& seed,
                        const std::vector<bench::Problem>& problems,
                        dsl::ExecutionContext& executor_ctx, llm::ChatBackend& optimizer_backend,
                        const OptimizeConfig& cfg, uint64_t seed_value,
                        ExperienceTree resume_tree, const OptimizeHooks& hooks) {
    OptimizeResult result;
    result.tree = std::move(resume_tree);
    std::map<int, std::vector<std::string>> error_log_by_round;

    bench::EvalOptions eval_options = cfg.eval;
    eval_options.runs = cfg.search.validation_runs;

    auto evaluate_program = [&](const dsl::WorkflowProgram& program, int round) {
        bench::EvalOptions options = eval_options;
        options.base_seed = Rng::mix(seed_value, static_cast<uint64_t>(round));
        return bench::evaluate_workflow(program, problems, executor_ctx, options);
    };

    // seed evaluation (round 1), unless resuming past it
    if (result.tree.empty()) {
        SearchNode node;
        node.round = 1;
        node.program = seed;
        node.program.meta.round = 1;
        node.modification = "seed";
        bench::EvalResult eval = evaluate_program(seed, 1);
        node.median_score = eval.median_score;
        node.per_run_scores = eval.per_run_scores;
        node.diag_counts = count_diags(eval.diagnostics);
        error_log_by_round[1] = recent_errors(eval);
        result.tree.add(std::move(node));
        result.tracker.add_round(1, result.tree, cfg.search);
        result.rounds.push_back({1, true, false, "", 0, eval.median_score});
        if (hooks.on_evaluated) hooks.on_evaluated(1, eval, nullptr);
        if (hooks.on_round) hooks.on_round(1, result.tree, result.tracker);
    } else {
        // rebuild the convergence history for the resumed rounds
        ExperienceTree replay;
        for (const auto& [round, node] : result.tree.nodes()) {
            replay.add(node);
            result.tracker.add_round(round, replay, cfg.search);
        }
    }

    int first_round = result.tree.max_round() + 1;
    int last_round = cfg.search.max_rounds + 1;  // seed occupies round 1

    for (int round = first_round; round <= last_round; ++round) {
        if (result.tracker.converged(cfg.search)) {
            result.converged_early = true;
            break;
        }

        RoundRecord record;
        record.round = round;
        Rng round_rng(Rng::mix(Rng::mix(seed_value, 0x726f756e64ull), static_cast<uint64_t>(round)));

        std::optional<ModificationProposal> accepted;
        std::optional<CriticReport> accepted_critic;
        int accepted_parent = 0;
        std::string skip_reason;

        for (int attempt = 0; attempt < cfg.search.reject_retries; ++attempt) {
            std::vector<int> top = result.tree.top_rounds(cfg.search.top_k);
            std::vector<const SearchNode*> candidates;
            for (int r : top) candidates.push_back(result.tree.find(r));
            if (candidates.empty()) {
                skip_reason = "no candidates";
                break;
            }
            int pick = select_index(candidates, cfg.search, round_rng);
            const SearchNode& parent = *candidates[static_cast<size_t>(pick)];

            CriticReport critic = run_critic(parent, cfg.search);
            ProposeOutcome proposed = propose_mutation(
                parent, result.tree, critic, cfg.task_name, error_log_by_round[parent.round],
                *executor_ctx.gateway, optimizer_backend, cfg.search, cfg.optimizer_model_id);
            if (!proposed.proposal) {
                skip_reason = proposed.failure_reason;
                break;  // unparsable after retries: skip the round
            }
            std::string reject_reason;
            if (!check_modification(*proposed.proposal, result.tree, cfg.harmful_patterns,
                                    &reject_reason)) {
                skip_reason = reject_reason;
                continue;  // retry selection
            }
            accepted = std::move(proposed.proposal);
            accepted_critic = critic;
            accepted_parent = parent.round;
            break;
        }

        if (!accepted) {
            record.skipped = true;
            record.skip_reason = skip_reason;
            result.rounds.push_back(record);
            result.tracker.add_round(round, result.tree, cfg.search);
            if (hooks.on_round) hooks.on_round(round, result.tree, result.tracker);
            continue;
        }

        SearchNode node;
        node.round = round;
        node.program = accepted->program;
        node.program.meta.round = round;
        node.program.meta.parent_round = accepted_parent;
        node.parent_round = accepted_parent;
        node.modification = accepted->modification;
        bench::EvalResult eval = evaluate_program(node.program, round);
        node.median_score = eval.median_score;
        node.per_run_scores = eval.per_run_scores;
        node.diag_counts = count_diags(eval.diagnostics);
        error_log_by_round[round] = recent_errors(eval);

        const SearchNode* parent = result.tree.find(accepted_parent);
        OutcomeClass cls =
            classify_outcome(node.median_score, parent ? parent->median_score : 0.0,
                             cfg.search.epsilon);
        result.tree.record_child(accepted_parent,
                                 {round, node.modification, node.median_score, cls});
        record.evaluated = true;
        record.parent_round = accepted_parent;
        record.median_score = node.median_score;
        result.tree.add(std::move(node));
        result.rounds.push_back(record);
        result.tracker.add_round(round, result.tree, cfg.search);
        if (hooks.on_evaluated)
            hooks.on_evaluated(round, eval, accepted_critic ? &*accepted_critic : nullptr);
        if (hooks.on_round) hooks.on_round(round, result.tree, result.tracker);
    }

    result.best_round = result.tree.best_round();
    return result;
}

}  // namespace wflow::mcts
