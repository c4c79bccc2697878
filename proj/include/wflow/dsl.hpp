#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wflow/codeexec.hpp"
#include "wflow/llm.hpp"
#include "wflow/rng.hpp"

namespace wflow::react {
class ToolRegistry;
}

namespace wflow::dsl {

// ---------------------------------------------------------------------------
// Program model
//
// A workflow is an ordered list of statements over a fixed operator
// repertoire. Statement inputs are the problem text or outputs of earlier
// statements, so the graph is acyclic by construction. Prompt slots hold the
// optimizable instruction strings.
// ---------------------------------------------------------------------------

enum class OperatorKind {
    Custom,
    ToolAgent,
    CodeLevel,
    ScEnsemble,
    MdEnsemble,
    Programmer,
    Review,
    Revise,
    Test,
    AnswerGenerate,
    Format,
    AnswerValidator,
};

const char* operator_name(OperatorKind kind);
std::optional<OperatorKind> operator_from_name(const std::string& name);

struct ArgValue {
    enum class Kind { String, Number, ProblemInput, Ref, List, SlotName };
    Kind kind = Kind::String;
    std::string str;                      // String literal or SlotName
    double num = 0.0;                     // Number
    std::string ref_id, ref_field;        // Ref (field optional)
    std::vector<ArgValue> items;          // List

    static ArgValue string(std::string s);
    static ArgValue number(double v);
    static ArgValue problem();
    static ArgValue ref(std::string id, std::string field = "");
    static ArgValue slot(std::string name);
    static ArgValue list(std::vector<ArgValue> items);

    bool operator==(const ArgValue& other) const;
};

struct Condition {
    enum class Kind { Present, Absent, Equals };
    Kind kind = Kind::Present;
    std::string ref_id, ref_field;
    std::string literal;  // Equals only

    bool operator==(const Condition& other) const = default;
};

struct Statement {
    std::string id;
    OperatorKind op = OperatorKind::Custom;
    std::map<std::string, ArgValue> args;
    std::optional<Condition> condition;

    bool operator==(const Statement& other) const;
};

struct ProgramMeta {
    int round = 0;
    int parent_round = 0;
};

inline constexpr int kMaxNodes = 10;

struct WorkflowProgram {
    std::string model_id = "executor";
    double temperature = 0.0;
    std::string output_format = "text";
    std::map<std::string, std::string> prompt_slots;
    std::vector<Statement> nodes;
    std::string answer_id;  // empty means the last statement is terminal
    ProgramMeta meta;

    const Statement* terminal() const;
    const Statement* find(const std::string& id) const;
};

struct Diagnostic {
    int line = 0;
    int col = 0;
    std::string message;
};

class ParseError : public std::runtime_error {
public:
    ParseError(Diagnostic d, const std::string& what_arg)
        : std::runtime_error(what_arg), diag(std::move(d)) {}
    Diagnostic diag;
};

WorkflowProgram parse(const std::string& source);
std::string serialize(const WorkflowProgram& program);  // canonical form
nlohmann::json program_to_json(const WorkflowProgram& program);
WorkflowProgram program_from_json(const nlohmann::json& doc);

// statement-level tree diff (insert/delete/modify each count 1); a changed
// prompt slot counts 1 regardless of the size of the text edit
int statement_diff(const WorkflowProgram& before, const WorkflowProgram& after);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct StatementRecord {
    std::string id;
    std::string op;
    std::string inputs_digest;
    std::string output;                           // primary text output
    std::map<std::string, std::string> fields;    // named sub-outputs
    double cost_usd = 0.0;
    double wall_ms = 0.0;
    bool skipped = false;
    std::optional<std::string> error;
    std::vector<std::string> warnings;
};

struct ExecutionTrace {
    std::vector<StatementRecord> records;
    double total_cost() const;
    const StatementRecord* find(const std::string& id) const;
    nlohmann::json to_json() const;
};

struct ExecutionContext {
    llm::Gateway* gateway = nullptr;
    llm::ChatBackend* backend = nullptr;
    const react::ToolRegistry* tools = nullptr;
    CodeExecutor* executor = nullptr;
    std::string react_protocol;  // fixed protocol layer for ToolAgent
    uint64_t seed = 0;
    std::string cost_tag = "executor";
    // fixed parameters of the running program; execute() fills these
    std::string model_id = "executor";
    double temperature = 0.0;
};

struct ExecutionResult {
    std::string answer;
    ExecutionTrace trace;
};

// Statements run in order; a failing statement is recorded in the trace and
// its dependents are skipped. The answer falls back to the last successful
// textual output when the terminal statement did not produce one.
ExecutionResult execute(const WorkflowProgram& program, const std::string& problem,
                        ExecutionContext& ctx);

// ---------------------------------------------------------------------------
// Operator primitives (used by execute; exposed for direct tests)
// ---------------------------------------------------------------------------

struct OpOutput {
    std::string text;
    std::map<std::string, std::string> fields;
    double cost_usd = 0.0;
    std::vector<std::string> warnings;
};

OpOutput op_custom(const std::string& input, const std::string& prompt_text,
                   ExecutionContext& ctx);
OpOutput op_sc_ensemble(const std::vector<std::string>& solutions, const std::string& question,
                        ExecutionContext& ctx);
using Shuffler = std::function<std::vector<int>(int n, int round)>;
OpOutput op_md_ensemble(const std::vector<std::string>& solutions, const std::string& question,
                        ExecutionContext& ctx, const Shuffler& shuffler = nullptr);
OpOutput op_code_level(const std::string& tool_name, const std::string& problem,
                       ExecutionContext& ctx);
OpOutput op_programmer(const std::string& problem, const std::string& analysis,
                       ExecutionContext& ctx);
OpOutput op_review(const std::string& problem, const std::string& solution,
                   ExecutionContext& ctx);
OpOutput op_revise(const std::string& problem, const std::string& solution,
                   const std::string& feedback, ExecutionContext& ctx);
OpOutput op_test(const std::string& problem, const std::string& solution,
                 const std::string& cases, ExecutionContext& ctx);
OpOutput op_answer_generate(const std::string& input, ExecutionContext& ctx);
OpOutput op_format(const std::string& input, const std::string& instruction,
                   ExecutionContext& ctx);
OpOutput op_answer_validator(const std::string& input, ExecutionContext& ctx);

}  // namespace wflow::dsl
