#include <chrono>

#include "wflow/dsl.hpp"
#include "wflow/prompts.hpp"
#include "wflow/react.hpp"
#include "wflow/util.hpp"

namespace wflow::dsl {

double ExecutionTrace::total_cost() const {
    double t = 0.0;
    for (const auto& r : records) t += r.cost_usd;
    return t;
}

const StatementRecord* ExecutionTrace::find(const std::string& id) const {
    for (const auto& r : records)
        if (r.id == id) return &r;
    return nullptr;
}

nlohmann::json ExecutionTrace::to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json rec;
        rec["id"] = r.id;
        rec["op"] = r.op;
        rec["inputs_digest"] = r.inputs_digest;
        rec["output"] = r.output;
        rec["cost_usd"] = r.cost_usd;
        rec["wall_ms"] = r.wall_ms;
        rec["skipped"] = r.skipped;
        if (r.error) rec["error"] = *r.error;
        if (!r.warnings.empty()) rec["warnings"] = r.warnings;
        out.push_back(rec);
    }
    return out;
}

namespace {

llm::ChatResponse single_call(ExecutionContext& ctx, const std::string& prompt) {
    llm::ChatRequest request;
    request.model_id = ctx.model_id;
    request.temperature = ctx.temperature;
    request.messages = {{llm::Role::User, prompt}};
    return ctx.gateway->complete(request, *ctx.backend, ctx.cost_tag);
}

std::string letters_block(const std::vector<std::string>& solutions,
                          const std::vector<int>& order) {
    std::string out;
    for (size_t i = 0; i < order.size(); ++i)
        out += strf("\n%c: %s", static_cast<char>('A' + i),
                    solutions[static_cast<size_t>(order[i])].c_str());
    return out;
}

// first standalone capital letter within the valid range
std::optional<int> parse_letter(const std::string& text, int n) {
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c < 'A' || c >= 'A' + n) continue;
        bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
        bool right_ok =
            i + 1 >= text.size() || !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (left_ok && right_ok) return c - 'A';
    }
    return std::nullopt;
}

std::string extract_code_block(const std::string& text) {
    size_t fence = text.find("```");
    if (fence == std::string::npos) return trim(text);
    size_t line_end = text.find('\n', fence);
    if (line_end == std::string::npos) return trim(text);
    size_t close = text.find("```", line_end);
    if (close == std::string::npos) return trim(text.substr(line_end + 1));
    return trim(text.substr(line_end + 1, close - line_end - 1));
}

}  // namespace

OpOutput op_custom(const std::string& input, const std::string& prompt_text,
                   ExecutionContext& ctx) {
    std::string prompt = prompt_text;
    if (!input.empty()) prompt += "\n\n" + input;
    llm::ChatResponse r = single_call(ctx, prompt);
    return {r.text, {}, r.cost_usd, {}};
}

OpOutput op_sc_ensemble(const std::vector<std::string>& solutions, const std::string& question,
                        ExecutionContext& ctx) {
    if (solutions.empty()) throw std::invalid_argument("sc_ensemble needs at least one solution");
    if (solutions.size() == 1) return {solutions[0], {}, 0.0, {}};
    std::vector<int> order(solutions.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::string prompt = prompts::fill(prompts::sc_ensemble_template(),
                                       {{"question", question},
                                        {"solutions", letters_block(solutions, order)}});
    llm::ChatResponse r = single_call(ctx, prompt);
    OpOutput out;
    out.cost_usd = r.cost_usd;
    auto pick = parse_letter(r.text, static_cast<int>(solutions.size()));
    if (pick) {
        out.text = solutions[static_cast<size_t>(*pick)];
    } else {
        out.text = solutions[0];
        out.warnings.push_back("ensemble vote '" + trim(r.text) +
                               "' did not name a valid letter; kept the first solution");
    }
    return out;
}

OpOutput op_md_ensemble(const std::vector<std::string>& solutions, const std::string& question,
                        ExecutionContext& ctx, const Shuffler& shuffler) {
    if (solutions.empty()) throw std::invalid_argument("md_ensemble needs at least one solution");
    if (solutions.size() == 1) return {solutions[0], {}, 0.0, {}};
    const int rounds = 5;
    int n = static_cast<int>(solutions.size());
    Shuffler shuffle = shuffler;
    if (!shuffle) {
        shuffle = [&ctx, n](int count, int round) {
            Rng rng(Rng::mix(ctx.seed, 0x6d64656e73ull + static_cast<uint64_t>(round)));
            (void)count;
            return rng.permutation(n);
        };
    }
    OpOutput out;
    std::vector<int> votes(static_cast<size_t>(n), 0);
    for (int round = 0; round < rounds; ++round) {
        std::vector<int> order = shuffle(n, round);
        std::string prompt = prompts::fill(prompts::sc_ensemble_template(),
                                           {{"question", question},
                                            {"solutions", letters_block(solutions, order)}});
        llm::ChatResponse r = single_call(ctx, prompt);
        out.cost_usd += r.cost_usd;
        auto pick = parse_letter(r.text, n);
        if (pick)
            ++votes[static_cast<size_t>(order[static_cast<size_t>(*pick)])];
        else
            out.warnings.push_back(strf("vote round %d unparsable", round + 1));
    }
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (votes[static_cast<size_t>(i)] > votes[static_cast<size_t>(best)]) best = i;
    // ties fall to the earliest original index by the strict '>' above
    out.text = solutions[static_cast<size_t>(best)];
    return out;
}

OpOutput op_code_level(const std::string& tool_name, const std::string& problem,
                       ExecutionContext& ctx) {
    if (!ctx.tools) throw std::invalid_argument("code_level requires a tool registry");
    const react::ToolSpec* tool = ctx.tools->find(tool_name);
    if (!tool) throw std::invalid_argument("unknown tool '" + tool_name + "'");
    if (!tool->code_level)
        throw std::invalid_argument("tool '" + tool_name + "' has no code-level entry point");
    OpOutput out;
    auto augmented = tool->code_level(problem);
    if (augmented) {
        out.text = *augmented;
    } else {
        out.text = problem;
        out.warnings.push_back("tool '" + tool_name +
                               "' could not extract its inputs; problem passed through");
    }
    return out;  // zero backend cost by construction
}

OpOutput op_programmer(const std::string& problem, const std::string& analysis,
                       ExecutionContext& ctx) {
    if (!ctx.executor) throw std::invalid_argument("programmer requires a code executor");
    OpOutput out;
    std::string code;
    CodeExecutor::Result run;
    const int max_attempts = 3;
    std::string prompt = prompts::fill(prompts::programmer_template(),
                                       {{"problem", problem},
                                        {"analysis", analysis.empty() ? "None" : analysis}});
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        llm::ChatResponse r = single_call(ctx, prompt);
        out.cost_usd += r.cost_usd;
        code = extract_code_block(r.text);
        run = ctx.executor->run(code);
        if (run.ok()) {
            out.text = trim(run.output);
            out.fields["code"] = code;
            out.fields["output"] = out.text;
            return out;
        }
        std::string error = run.timed_out ? "timeout" : trim(run.output);
        out.warnings.push_back(strf("attempt %d failed: %s", attempt, error.c_str()));
        prompt = prompts::fill(prompts::programmer_retry_template(),
                               {{"problem", problem}, {"code", code}, {"error", error}});
    }
    out.text = "all attempts failed: " + trim(run.output);
    out.fields["code"] = code;
    out.fields["output"] = out.text;
    return out;
}

OpOutput op_review(const std::string& problem, const std::string& solution,
                   ExecutionContext& ctx) {
    std::string prompt = prompts::fill(prompts::review_template(),
                                       {{"problem", problem}, {"solution", solution}});
    llm::ChatResponse r = single_call(ctx, prompt);
    OpOutput out;
    out.cost_usd = r.cost_usd;
    std::string lc = lowercase(r.text);
    bool has_true = lc.find("true") != std::string::npos;
    bool has_false = lc.find("false") != std::string::npos;
    if (has_true == has_false) {
        out.warnings.push_back("review verdict not found; treating as pass");
        out.fields["verdict"] = "true";
    } else {
        out.fields["verdict"] = has_false ? "false" : "true";
    }
    out.fields["feedback"] = trim(r.text);
    out.text = out.fields["feedback"];
    return out;
}

OpOutput op_revise(const std::string& problem, const std::string& solution,
                   const std::string& feedback, ExecutionContext& ctx) {
    std::string prompt = prompts::fill(
        prompts::revise_template(),
        {{"problem", problem}, {"solution", solution}, {"feedback", feedback}});
    llm::ChatResponse r = single_call(ctx, prompt);
    return {trim(r.text), {}, r.cost_usd, {}};
}

OpOutput op_test(const std::string& problem, const std::string& solution,
                 const std::string& cases, ExecutionContext& ctx) {
    if (!ctx.executor) throw std::invalid_argument("test requires a code executor");
    OpOutput out;
    std::string current = solution;
    const int max_loops = 3;
    CodeExecutor::Result run;
    for (int loop = 1; loop <= max_loops; ++loop) {
        run = ctx.executor->run(current + "\n\n" + cases + "\n");
        if (run.ok()) {
            out.text = current;
            out.fields["passed"] = "true";
            out.fields["output"] = trim(run.output);
            return out;
        }
        std::string error = run.timed_out ? "timeout" : trim(run.output);
        out.warnings.push_back(strf("test loop %d failed: %s", loop, error.c_str()));
        if (loop == max_loops) break;
        std::string prompt = prompts::fill(
            prompts::test_reflect_template(),
            {{"problem", problem}, {"solution", current}, {"error", error}});
        llm::ChatResponse r = single_call(ctx, prompt);
        out.cost_usd += r.cost_usd;
        current = extract_code_block(r.text);
    }
    out.text = current;
    out.fields["passed"] = "false";
    out.fields["output"] = trim(run.output);
    return out;
}

OpOutput op_answer_generate(const std::string& input, ExecutionContext& ctx) {
    std::string prompt = prompts::fill(prompts::answer_generate_template(), {{"input", input}});
    llm::ChatResponse r = single_call(ctx, prompt);
    OpOutput out;
    out.cost_usd = r.cost_usd;
    auto grab = [&](const std::string& tag) -> std::optional<std::string> {
        std::string open = "<" + tag + ">", close = "</" + tag + ">";
        size_t b = r.text.find(open);
        if (b == std::string::npos) return std::nullopt;
        b += open.size();
        size_t e = r.text.find(close, b);
        if (e == std::string::npos) return std::nullopt;
        return trim(r.text.substr(b, e - b));
    };
    auto thought = grab("thought");
    auto answer = grab("answer");
    if (!thought || !answer) {
        out.text = trim(r.text);
        out.warnings.push_back("missing <thought>/<answer> tags; returning raw text");
        return out;
    }
    out.fields["thought"] = *thought;
    out.fields["answer"] = *answer;
    out.text = *answer;
    return out;
}

OpOutput op_format(const std::string& input, const std::string& instruction,
                   ExecutionContext& ctx) {
    std::string prompt = prompts::fill(
        prompts::format_template(),
        {{"instruction", instruction.empty() ? "Reformat the answer." : instruction},
         {"input", input}});
    llm::ChatResponse r = single_call(ctx, prompt);
    return {trim(r.text), {}, r.cost_usd, {}};
}

OpOutput op_answer_validator(const std::string& input, ExecutionContext& ctx) {
    OpOutput out;
    if (trim(input).empty()) {
        out.text = input;
        out.fields["valid"] = "false";
        out.warnings.push_back("empty answer rejected without a backend call");
        return out;
    }
    std::string prompt = prompts::fill(prompts::validator_template(), {{"input", input}});
    llm::ChatResponse r = single_call(ctx, prompt);
    out.cost_usd = r.cost_usd;
    std::string text = trim(r.text);
    std::string first_line = lowercase(trim(split(text, '\n')[0]));
    out.fields["valid"] = first_line.find("invalid") == std::string::npos ? "true" : "false";
    size_t nl = text.find('\n');
    out.text = nl == std::string::npos ? input : trim(text.substr(nl + 1));
    if (out.text.empty()) out.text = input;
    return out;
}

// --- executor ----------------------------------------------------------------

namespace {

struct ResolvedValues {
    const std::vector<StatementRecord>* trace = nullptr;
    std::map<std::string, size_t> index;

    std::optional<std::string> lookup(const std::string& id, const std::string& field) const {
        auto it = index.find(id);
        if (it == index.end()) return std::nullopt;
        const StatementRecord& rec = (*trace)[it->second];
        if (rec.skipped || rec.error) return std::nullopt;
        if (field.empty()) return rec.output;
        auto fit = rec.fields.find(field);
        if (fit == rec.fields.end()) return std::nullopt;
        return fit->second;
    }
};

std::string resolve_data(const ArgValue& value, const std::string& problem,
                         const ResolvedValues& values, bool* missing) {
    switch (value.kind) {
        case ArgValue::Kind::String: return value.str;
        case ArgValue::Kind::Number: {
            double v = value.num;
            if (v == static_cast<long long>(v)) return strf("%lld", static_cast<long long>(v));
            return strf("%g", v);
        }
        case ArgValue::Kind::ProblemInput: return problem;
        case ArgValue::Kind::Ref: {
            auto got = values.lookup(value.ref_id, value.ref_field);
            if (!got) {
                *missing = true;
                return "";
            }
            return *got;
        }
        case ArgValue::Kind::List: {
            std::string joined;
            for (const auto& item : value.items) {
                std::string part = resolve_data(item, problem, values, missing);
                if (!joined.empty() && !part.empty()) joined += "\n\n";
                joined += part;
            }
            return joined;
        }
        case ArgValue::Kind::SlotName: return value.str;
    }
    return "";
}

std::vector<std::string> resolve_list(const ArgValue& value, const std::string& problem,
                                      const ResolvedValues& values, bool* missing) {
    std::vector<std::string> out;
    if (value.kind != ArgValue::Kind::List) {
        out.push_back(resolve_data(value, problem, values, missing));
        return out;
    }
    for (const auto& item : value.items)
        out.push_back(resolve_data(item, problem, values, missing));
    return out;
}

}  // namespace

ExecutionResult execute(const WorkflowProgram& program, const std::string& problem,
                        ExecutionContext& ctx) {
    ExecutionResult result;
    ResolvedValues values;
    values.trace = &result.trace.records;
    ctx.model_id = program.model_id;
    ctx.temperature = program.temperature;

    for (const auto& stmt : program.nodes) {
        StatementRecord record;
        record.id = stmt.id;
        record.op = operator_name(stmt.op);

        // condition gate
        bool run_it = true;
        if (stmt.condition) {
            auto got = values.lookup(stmt.condition->ref_id, stmt.condition->ref_field);
            switch (stmt.condition->kind) {
                case Condition::Kind::Present: run_it = got.has_value() && !got->empty(); break;
                case Condition::Kind::Absent: run_it = !got.has_value() || got->empty(); break;
                case Condition::Kind::Equals:
                    run_it = got.has_value() && trim(*got) == stmt.condition->literal;
                    break;
            }
        }

        bool missing = false;
        std::map<std::string, std::string> inputs;
        std::vector<std::string> list_input;
        if (run_it) {
            for (const auto& [pname, value] : stmt.args) {
                if (value.kind == ArgValue::Kind::SlotName) {
                    auto it = program.prompt_slots.find(value.str);
                    inputs[pname] = it == program.prompt_slots.end() ? "" : it->second;
                } else if (value.kind == ArgValue::Kind::List) {
                    list_input = resolve_list(value, problem, values, &missing);
                    inputs[pname] = resolve_data(value, problem, values, &missing);
                } else {
                    inputs[pname] = resolve_data(value, problem, values, &missing);
                }
            }
        }

        if (!run_it) {
            record.skipped = true;
        } else if (missing) {
            record.skipped = true;
            record.warnings.push_back("skipped: upstream output unavailable");
        } else {
            std::string digest;
            for (const auto& [k, v] : inputs) digest += k + "=" + v + ";";
            record.inputs_digest = hex64(fnv1a64(digest));
            auto started = std::chrono::steady_clock::now();
            try {
                OpOutput out;
                switch (stmt.op) {
                    case OperatorKind::Custom:
                        out = op_custom(inputs["input"], inputs["prompt"], ctx);
                        break;
                    case OperatorKind::ToolAgent: {
                        if (!ctx.tools)
                            throw std::invalid_argument("tool_agent requires a tool registry");
                        react::ToolAgentOptions options;
                        options.max_iterations =
                            stmt.args.count("max_steps")
                                ? static_cast<int>(stmt.args.at("max_steps").num)
                                : 2;
                        options.cost_tag = ctx.cost_tag;
                        options.model_id = ctx.model_id;
                        options.temperature = ctx.temperature;
                        auto agent = react::run_tool_agent(
                            inputs["input"], inputs["strategy"], *ctx.tools,
                            ctx.react_protocol.empty() ? prompts::react_fixed_protocol()
                                                       : ctx.react_protocol,
                            *ctx.gateway, *ctx.backend, options);
                        out.text = agent.answer;
                        out.cost_usd = agent.cost_usd;
                        out.fields["llm_calls"] = strf("%d", agent.llm_calls);
                        if (agent.fallback_used) out.fields["fallback"] = "true";
                        break;
                    }
                    case OperatorKind::CodeLevel:
                        out = op_code_level(stmt.args.at("tool").str, inputs["input"], ctx);
                        break;
                    case OperatorKind::ScEnsemble:
                        out = op_sc_ensemble(list_input, inputs["question"], ctx);
                        break;
                    case OperatorKind::MdEnsemble:
                        out = op_md_ensemble(list_input, inputs["question"], ctx);
                        break;
                    case OperatorKind::Programmer:
                        out = op_programmer(inputs["problem"], inputs["analysis"], ctx);
                        break;
                    case OperatorKind::Review:
                        out = op_review(inputs["problem"], inputs["solution"], ctx);
                        break;
                    case OperatorKind::Revise:
                        out = op_revise(inputs["problem"], inputs["solution"], inputs["feedback"],
                                        ctx);
                        break;
                    case OperatorKind::Test:
                        out = op_test(inputs["problem"], inputs["solution"], inputs["cases"], ctx);
                        break;
                    case OperatorKind::AnswerGenerate:
                        out = op_answer_generate(inputs["input"], ctx);
                        break;
                    case OperatorKind::Format:
                        out = op_format(inputs["input"], inputs["instruction"], ctx);
                        break;
                    case OperatorKind::AnswerValidator:
                        out = op_answer_validator(inputs["input"], ctx);
                        break;
                }
                record.output = out.text;
                record.fields = out.fields;
                record.cost_usd = out.cost_usd;
                record.warnings.insert(record.warnings.end(), out.warnings.begin(),
                                       out.warnings.end());
            } catch (const std::exception& e) {
                record.error = e.what();
            }
            record.wall_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
        }

        result.trace.records.push_back(record);
        values.index[stmt.id] = result.trace.records.size() - 1;
    }

    const Statement* terminal = program.terminal();
    if (terminal) {
        auto got = values.lookup(terminal->id, "");
        if (got && !got->empty()) {
            result.answer = *got;
            return result;
        }
    }
    // fall back to the last successful textual output
    for (auto it = result.trace.records.rbegin(); it != result.trace.records.rend(); ++it) {
        if (!it->skipped && !it->error && !it->output.empty()) {
            result.answer = it->output;
            return result;
        }
    }
    result.answer = "";
    return result;
}

}  // namespace wflow::dsl
