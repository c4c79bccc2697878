#pragma once

#include <string>
#include <utility>
#include <vector>

// Prompt templates used by operators and by the search loop. The ReAct fixed
// protocol also ships as data/prompts/react_protocol_v1.txt; a test pins the
// two copies together.
namespace wflow::prompts {

const std::string& react_fixed_protocol();
const std::string& sc_ensemble_template();   // {question} {solutions}
const std::string& review_template();        // {problem} {solution}
const std::string& revise_template();        // {problem} {solution} {feedback}
const std::string& answer_generate_template();  // {input}
const std::string& format_template();        // {instruction} {input}
const std::string& validator_template();     // {input}
const std::string& programmer_template();    // {problem} {analysis}
const std::string& programmer_retry_template();  // {problem} {code} {error}
const std::string& test_reflect_template();  // {problem} {solution} {error}
const std::string& optimize_system_template();   // {type}
const std::string& optimize_input_template();    // {experience} {score} {graph} {prompt}
                                                 // {operator_description} {log}

// replace every occurrence of "{key}" in the template
std::string fill(const std::string& tmpl,
                 const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace wflow::prompts
