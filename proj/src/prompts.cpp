#include "wflow/prompts.hpp"

#include <utility>
#include <vector>

namespace wflow::prompts {

const std::string& react_fixed_protocol() {
    static const std::string text = R"(Your response MUST be in valid XML format with ALL required tags.

If you want to use a tool, output EXACTLY this format:
<thought>Your reasoning about what to do next</thought>
<action_type>use_tool</action_type>
<tool_name>name of the tool</tool_name>
<tool_args>{"arg1": "value1", "arg2": "value2"}</tool_args>

If you want to provide the final answer, output EXACTLY this format:
<thought>Your reasoning about why you can answer now</thought>
<action_type>final_answer</action_type>
<final_answer>Your CONCISE answer to the question</final_answer>

STRICT REQUIREMENTS:
- ALWAYS include <thought> and <action_type> tags.
- tool_args MUST be valid JSON: double quotes, no trailing commas.
- All numeric values must be pre-computed numbers, not expressions.
- <final_answer> tag MUST contain the actual answer, NOT be empty.
)";
    return text;
}

const std::string& sc_ensemble_template() {
    static const std::string text = R"(Given the question: {question}
Several solutions have been generated: {solutions}

Carefully evaluate these solutions and identify the answer that appears most frequently across them. This consistency in answers is crucial for determining the most reliable solution.

In the "thought" field, provide a detailed explanation of your thought process. In the "solution_letter" field, output only the single letter ID (A, B, C, etc.) corresponding to the most consistent solution.)";
    return text;
}

const std::string& review_template() {
    static const std::string text = R"(Given a problem and a solution, review the solution's correctness using critical thinking and provide a result in boolean format.

problem: {problem}
solution: {solution}

If you are more than 95 percent confident that the final answer is incorrect, return False and give feedback for the error. Otherwise, return True and explain the correctness.)";
    return text;
}

const std::string& revise_template() {
    static const std::string text = R"(Given a problem and a solution which is just reviewed as incorrect, revise the solution to solve the question.

problem: {problem}
solution: {solution}
feedback: {feedback}

Ensure the output is self-contained, without additional text or test cases.)";
    return text;
}

const std::string& answer_generate_template() {
    static const std::string text = R"(Think through the following problem step by step, then give the final answer.

{input}

Reply in exactly this format:
<thought>your step-by-step reasoning</thought>
<answer>the final answer only</answer>)";
    return text;
}

const std::string& format_template() {
    static const std::string text = R"({instruction}

Reformat the following solution so it matches the expected output fields exactly. Keep the values, drop the narration.

{input})";
    return text;
}

const std::string& validator_template() {
    static const std::string text = R"(Check whether the following answer is well-formed: it must state a concrete value for every field it names, with units where applicable.

{input}

Reply with "valid" or "invalid" on the first line, then the cleaned-up answer.)";
    return text;
}

const std::string& programmer_template() {
    static const std::string text = R"(Write a short self-contained Python program that computes the answer to the problem below and prints it. Print only the result.

problem: {problem}
analysis: {analysis}

Reply with the code inside a ```python code block.)";
    return text;
}

const std::string& programmer_retry_template() {
    static const std::string text = R"(The previous program failed. Fix it and reply with the corrected code inside a ```python code block.

problem: {problem}
previous code:
{code}
error:
{error})";
    return text;
}

const std::string& test_reflect_template() {
    static const std::string text = R"(The solution below fails the provided test cases. Revise it so the tests pass, and reply with the complete revised solution only.

problem: {problem}
solution:
{solution}
test output:
{error})";
    return text;
}

const std::string& optimize_system_template() {
    static const std::string text = R"(You are building a Graph and corresponding Prompt to jointly solve {type} problems. Referring to the given graph and prompt, which forms a basic example of a {type} solution approach, please reconstruct and optimize them. You can add, modify, or delete nodes, parameters, or prompts. Include your single modification in XML tags in your reply. Ensure they are complete and correct to avoid runtime failures.

When optimizing, you can incorporate critical thinking methods like review, revise, ensemble (generating multiple answers through different/similar prompts, then voting/integrating/checking the majority to obtain a final answer), selfAsk, etc. Consider loops, conditional statements, or machine learning techniques. The graph complexity should not exceed 10.

Output the modified graph and all the necessary Prompts (if needed). The prompt you need to generate is only the one referenced by prompt slots within Custom. Other methods already have built-in prompts and are prohibited from being generated. The generated prompt must not contain any placeholders.

Considering information loss, complex graphs may yield better results, but insufficient information transmission can omit the solution. It's crucial to include necessary context during the process.

Reply with exactly these XML tags:
<modification>one sentence describing the single change</modification>
<graph>the complete statement list in the workflow language</graph>
<prompt>the complete prompt slot definitions, one per line as: prompt NAME = """text"""</prompt>)";
    return text;
}

const std::string& optimize_input_template() {
    static const std::string text = R"(Here is a graph and prompt that performed excellently in a previous iteration (maximum score is 1). You must make further optimizations based on this graph. The modified graph must differ from the provided example.

<sample>
  <experience>{experience}</experience>
  <score>{score}</score>
  <graph>{graph}</graph>
  <prompt>{prompt}</prompt>
  <operator_description>{operator_description}</operator_description>
</sample>

Below are the logs of results that encountered errors, which can be used as references for optimization: {log}

SCORE-BASED OPTIMIZATION RULES (YOUR CURRENT SCORE IS {score}):
- Score >= 0.65 (HIGH): CONSERVATIVE - Minor prompt tweaks only.
- Score 0.50-0.65 (MEDIUM): MODERATE - Single structural change.
- Score < 0.50 (LOW): AGGRESSIVE - Major restructuring allowed.

Only one detail point can be modified at a time, and no more than 5 lines of code may be changed per modification.)";
    return text;
}

std::string fill(const std::string& tmpl,
                 const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out = tmpl;
    for (const auto& [key, value] : values) {
        std::string marker = "{" + key + "}";
        size_t pos = 0;
        while ((pos = out.find(marker, pos)) != std::string::npos) {
            out.replace(pos, marker.size(), value);
            pos += value.size();
        }
    }
    return out;
}

}  // namespace wflow::prompts
