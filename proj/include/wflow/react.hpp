#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wflow/llm.hpp"

namespace wflow::react {

class ProtocolParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class ArgParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class ToolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ToolArg {
    std::string name;
    std::string description;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ToolArg> args;
    // ReAct invocation path: structured arguments in, text result out
    std::function<std::string(const nlohmann::json&)> invoke;
    // deterministic invocation path: extract the tool's inputs from the
    // problem text and return the augmented text; nullopt = extraction miss
    std::function<std::optional<std::string>(const std::string&)> code_level;
};

class ToolRegistry {
public:
    void add(ToolSpec spec);
    const ToolSpec* find(const std::string& name) const;
    std::vector<std::string> names() const;
    std::string render_descriptions() const;
    size_t size() const { return tools_.size(); }

private:
    std::map<std::string, ToolSpec> tools_;
};

struct ReactAction {
    enum class Kind { UseTool, Finish };
    Kind kind = Kind::Finish;
    std::string thought;
    std::string tool_name;
    nlohmann::json tool_args;
    std::string final_answer;
};

struct ReactStep {
    std::string thought;
    std::string action;  // "use_tool:<name>", "final_answer", or "(protocol error)"
    std::string result;
    bool failed = false;
};

// Pulls the tagged action out of the model reply; tolerant of surrounding
// prose. Throws ProtocolParseError when mandatory tags are missing or the
// final answer is empty.
ReactAction parse_react_output(const std::string& text);

// Repairs common model-output defects before JSON parsing, in order:
// doubled braces, lone LaTeX backslashes, inline arithmetic in numeric
// fields, trailing commas, single quotes.
nlohmann::json repair_tool_args(const std::string& raw);

// Tiny arithmetic evaluator over + - * / ** with parentheses; literals only.
std::optional<double> eval_arithmetic(const std::string& expr);

struct ToolAgentResult {
    std::string answer;
    std::vector<ReactStep> steps;
    int llm_calls = 0;
    bool fallback_used = false;
    double cost_usd = 0.0;
};

struct ToolAgentOptions {
    int max_iterations = 2;
    std::string model_id = "executor";
    double temperature = 0.0;
    std::string cost_tag = "executor";
};

// Reason-act loop: each iteration asks the model for an action, executes the
// requested tool, and appends the step to the history. Two consecutive
// failures stop the loop early; if no finish action arrived, one summary call
// over the last three steps produces the answer.
ToolAgentResult run_tool_agent(const std::string& problem, const std::string& strategy_prompt,
                               const ToolRegistry& registry, const std::string& fixed_protocol,
                               llm::Gateway& gateway, llm::ChatBackend& backend,
                               const ToolAgentOptions& options = {});

std::string assemble_react_prompt(const std::string& strategy_prompt,
                                  const std::string& tools_description,
                                  const std::string& problem,
                                  const std::vector<ReactStep>& history,
                                  const std::string& fixed_protocol);

}  // namespace wflow::react
