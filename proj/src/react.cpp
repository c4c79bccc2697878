#include "wflow/react.hpp"

#include <cctype>

#include "wflow/util.hpp"

namespace wflow::react {

using nlohmann::json;

void ToolRegistry::add(ToolSpec spec) { tools_[spec.name] = std::move(spec); }

const ToolSpec* ToolRegistry::find(const std::string& name) const {
    auto it = tools_.find(name);
    return it == tools_.end() ? nullptr : &it->second;
}

std::vector<std::string> ToolRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, spec] : tools_) {
        (void)spec;
        out.push_back(name);
    }
    return out;
}

std::string ToolRegistry::render_descriptions() const {
    std::string out;
    for (const auto& [name, spec] : tools_) {
        out += "- " + name + ": " + spec.description + "\n";
        if (!spec.args.empty()) {
            out += "  args: ";
            for (size_t i = 0; i < spec.args.size(); ++i)
                out += (i ? ", " : "") + spec.args[i].name + " (" + spec.args[i].description + ")";
            out += "\n";
        }
    }
    return out;
}

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

}  // namespace

ReactAction parse_react_output(const std::string& text) {
    auto thought = find_tag(text, "thought");
    auto action_type = find_tag(text, "action_type");
    if (!thought) throw ProtocolParseError("missing <thought> tag");
    if (!action_type) throw ProtocolParseError("missing <action_type> tag");

    ReactAction action;
    action.thought = trim(*thought);
    std::string kind = lowercase(trim(*action_type));
    if (kind == "use_tool") {
        auto tool_name = find_tag(text, "tool_name");
        auto tool_args = find_tag(text, "tool_args");
        if (!tool_name || trim(*tool_name).empty())
            throw ProtocolParseError("missing <tool_name> tag");
        if (!tool_args) throw ProtocolParseError("missing <tool_args> tag");
        action.kind = ReactAction::Kind::UseTool;
        action.tool_name = trim(*tool_name);
        action.tool_args = repair_tool_args(*tool_args);
        return action;
    }
    if (kind == "final_answer") {
        auto answer = find_tag(text, "final_answer");
        if (!answer) throw ProtocolParseError("missing <final_answer> tag");
        std::string trimmed = trim(*answer);
        if (trimmed.empty()) throw ProtocolParseError("<final_answer> must not be empty");
        action.kind = ReactAction::Kind::Finish;
        action.final_answer = trimmed;
        return action;
    }
    throw ProtocolParseError("unknown action type '" + kind + "'");
}

// --- tool argument repair ---------------------------------------------------

namespace {

// expression := term (('+'|'-') term)*
// term       := factor (('*'|'/') factor)*   ('**' binds tighter)
// factor     := power | '-' factor | '(' expression ')'
// power      := atom ('**' factor)?
struct ExprParser {
    const std::string& s;
    size_t pos = 0;
    bool ok = true;

    explicit ExprParser(const std::string& text) : s(text) {}

    void ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        ws();
        return pos >= s.size();
    }
    double expression() {
        double v = term();
        while (ok) {
            ws();
            if (pos < s.size() && s[pos] == '+') {
                ++pos;
                v += term();
            } else if (pos < s.size() && s[pos] == '-' &&
                       !(pos + 1 < s.size() && s[pos + 1] == '-')) {
                ++pos;
                v -= term();
            } else {
                break;
            }
        }
        return v;
    }
    double term() {
        double v = factor();
        while (ok) {
            ws();
            if (pos + 1 < s.size() && s[pos] == '*' && s[pos + 1] == '*') break;  // handled in power
            if (pos < s.size() && s[pos] == '*') {
                ++pos;
                v *= factor();
            } else if (pos < s.size() && s[pos] == '/') {
                ++pos;
                v /= factor();
            } else {
                break;
            }
        }
        return v;
    }
    double factor() {
        ws();
        if (pos < s.size() && s[pos] == '-') {
            ++pos;
            return -factor();
        }
        return power();
    }
    double power() {
        double base = atom();
        ws();
        if (pos + 1 < s.size() && s[pos] == '*' && s[pos + 1] == '*') {
            pos += 2;
            double exp = factor();
            return std::pow(base, exp);
        }
        return base;
    }
    double atom() {
        ws();
        if (pos < s.size() && s[pos] == '(') {
            ++pos;
            double v = expression();
            ws();
            if (pos < s.size() && s[pos] == ')')
                ++pos;
            else
                ok = false;
            return v;
        }
        size_t start = pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) ||
                                  s[pos] == '.' ||
                                  ((s[pos] == 'e' || s[pos] == 'E') && pos > start) ||
                                  ((s[pos] == '+' || s[pos] == '-') && pos > start &&
                                   (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
            ++pos;
        if (pos == start) {
            ok = false;
            return 0.0;
        }
        try {
            return std::stod(s.substr(start, pos - start));
        } catch (...) {
            ok = false;
            return 0.0;
        }
    }
};

bool has_operator_outside_exponent(const std::string& expr) {
    for (size_t i = 0; i < expr.size(); ++i) {
        char c = expr[i];
        if (c == '*' || c == '/' || c == '(') return true;
        if ((c == '+' || c == '-') && i > 0) {
            char prev = expr[i - 1];
            if (prev != 'e' && prev != 'E' && prev != '(' &&
                !std::isspace(static_cast<unsigned char>(prev)))
                return true;
            if (std::isspace(static_cast<unsigned char>(prev))) {
                // "1 + 2": operator separated by whitespace
                size_t j = i;
                while (j > 0 && std::isspace(static_cast<unsigned char>(expr[j - 1]))) --j;
                if (j > 0 && (std::isdigit(static_cast<unsigned char>(expr[j - 1])) ||
                              expr[j - 1] == '.' || expr[j - 1] == ')'))
                    return true;
            }
        }
    }
    return false;
}

std::string collapse_double_braces(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        if (i + 1 < raw.size() && raw[i] == '{' && raw[i + 1] == '{') {
            out.push_back('{');
            ++i;
        } else if (i + 1 < raw.size() && raw[i] == '}' && raw[i + 1] == '}') {
            out.push_back('}');
            ++i;
        } else {
            out.push_back(raw[i]);
        }
    }
    return out;
}

std::string escape_lone_backslashes(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_string = false;
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '"') {
            in_string = !in_string;
            out.push_back(c);
            continue;
        }
        if (in_string && c == '\\') {
            char next = i + 1 < raw.size() ? raw[i + 1] : '\0';
            bool keep = next == '"' || next == '\\' || next == '/' || next == 'n' || next == 't';
            if (next == 'u') keep = true;
            // \b, \f, \r followed by another letter read as LaTeX commands
            // (\frac, \beta, \rho), not as control escapes
            if ((next == 'b' || next == 'f' || next == 'r') &&
                !(i + 2 < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i + 2]))))
                keep = true;
            if (!keep) {
                out += "\\\\";
                continue;
            }
        }
        out.push_back(c);
    }
    return out;
}

// evaluate arithmetic expressions appearing as bare JSON values
std::string evaluate_inline_arithmetic(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_string = false;
    size_t i = 0;
    while (i < raw.size()) {
        char c = raw[i];
        if (c == '"') {
            in_string = !in_string;
            out.push_back(c);
            ++i;
            continue;
        }
        if (!in_string && (std::isdigit(static_cast<unsigned char>(c)) || c == '(' ||
                           ((c == '-' || c == '+') && i + 1 < raw.size() &&
                            (std::isdigit(static_cast<unsigned char>(raw[i + 1])) ||
                             raw[i + 1] == '(')))) {
            size_t start = i;
            int depth = 0;
            while (i < raw.size()) {
                char d = raw[i];
                if (d == '(') ++depth;
                if (d == ')') {
                    if (depth == 0) break;
                    --depth;
                }
                if (depth == 0 && (d == ',' || d == '}' || d == ']' || d == ':')) break;
                if (d == '"') break;
                ++i;
            }
            std::string expr = trim(raw.substr(start, i - start));
            if (has_operator_outside_exponent(expr)) {
                auto value = eval_arithmetic(expr);
                if (value) {
                    out += strf("%.17g", *value);
                    continue;
                }
            }
            out += raw.substr(start, i - start);
            continue;
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

std::string strip_trailing_commas(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_string = false;
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '"') in_string = !in_string;
        if (!in_string && c == ',') {
            size_t j = i + 1;
            while (j < raw.size() && std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
            if (j < raw.size() && (raw[j] == '}' || raw[j] == ']')) continue;
        }
        out.push_back(c);
    }
    return out;
}

std::string normalize_single_quotes(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    bool in_dq = false;
    for (size_t i = 0; i < raw.size(); ++i) {
        char c = raw[i];
        if (c == '"') {
            in_dq = !in_dq;
            out.push_back(c);
            continue;
        }
        if (!in_dq && c == '\'') {
            size_t end = raw.find('\'', i + 1);
            if (end != std::string::npos) {
                out.push_back('"');
                for (size_t j = i + 1; j < end; ++j) {
                    if (raw[j] == '"')
                        out += "\\\"";
                    else
                        out.push_back(raw[j]);
                }
                out.push_back('"');
                i = end;
                continue;
            }
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::optional<double> eval_arithmetic(const std::string& expr) {
    ExprParser parser(expr);
    double v = parser.expression();
    if (!parser.ok || !parser.eof()) return std::nullopt;
    return v;
}

json repair_tool_args(const std::string& raw) {
    std::string text = trim(raw);
    text = collapse_double_braces(text);
    text = escape_lone_backslashes(text);
    text = evaluate_inline_arithmetic(text);
    text = strip_trailing_commas(text);
    text = normalize_single_quotes(text);
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded())
        throw ArgParseError("tool arguments are not valid JSON after repair: " + trim(raw));
    return parsed;
}

// --- the loop ----------------------------------------------------------------

std::string assemble_react_prompt(const std::string& strategy_prompt,
                                  const std::string& tools_description,
                                  const std::string& problem,
                                  const std::vector<ReactStep>& history,
                                  const std::string& fixed_protocol) {
    std::string prompt = strategy_prompt + "\n\nAvailable Tools:\n" + tools_description +
                         "\nQuestion: " + problem + "\n\nPrevious Steps:\n";
    if (history.empty()) prompt += "(none)\n";
    for (size_t i = 0; i < history.size(); ++i)
        prompt += strf("Step %zu: thought=%s action=%s result=%s\n", i + 1,
                       history[i].thought.c_str(), history[i].action.c_str(),
                       history[i].result.c_str());
    prompt += "\n" + fixed_protocol;
    return prompt;
}

ToolAgentResult run_tool_agent(const std::string& problem, const std::string& strategy_prompt,
                               const ToolRegistry& registry, const std::string& fixed_protocol,
                               llm::Gateway& gateway, llm::ChatBackend& backend,
                               const ToolAgentOptions& options) {
    ToolAgentResult result;
    int consecutive_failures = 0;
    int max_iterations = std::max(1, options.max_iterations);
    std::string tools_description = registry.render_descriptions();

    for (int iteration = 1; iteration <= max_iterations; ++iteration) {
        llm::ChatRequest request;
        request.model_id = options.model_id;
        request.temperature = options.temperature;
        request.messages = {{llm::Role::User,
                             assemble_react_prompt(strategy_prompt, tools_description, problem,
                                                   result.steps, fixed_protocol)}};
        llm::ChatResponse response = gateway.complete(request, backend, options.cost_tag);
        ++result.llm_calls;
        result.cost_usd += response.cost_usd;

        ReactAction action;
        try {
            action = parse_react_output(response.text);
        } catch (const std::exception& e) {
            result.steps.push_back({"", "(protocol error)", e.what(), true});
            if (++consecutive_failures >= 2) break;
            continue;
        }

        if (action.kind == ReactAction::Kind::Finish) {
            result.answer = action.final_answer;
            return result;
        }

        ReactStep step;
        step.thought = action.thought;
        step.action = "use_tool:" + action.tool_name;
        const ToolSpec* tool = registry.find(action.tool_name);
        if (!tool) {
            step.result = "error: unknown tool '" + action.tool_name + "'";
            step.failed = true;
        } else {
            try {
                step.result = tool->invoke(action.tool_args);
            } catch (const std::exception& e) {
                step.result = std::string("error: ") + e.what();
                step.failed = true;
            }
        }
        result.steps.push_back(step);
        if (step.failed) {
            if (++consecutive_failures >= 2) break;
        } else {
            consecutive_failures = 0;
        }
    }

    // fallback: summarize the last three steps
    std::string summary_prompt = "Question: " + problem + "\n\nRecent steps:\n";
    size_t first = result.steps.size() > 3 ? result.steps.size() - 3 : 0;
    for (size_t i = first; i < result.steps.size(); ++i)
        summary_prompt += strf("Step %zu: thought=%s action=%s result=%s\n", i + 1,
                               result.steps[i].thought.c_str(), result.steps[i].action.c_str(),
                               result.steps[i].result.c_str());
    summary_prompt +=
        "\nBased on the question and the steps above, give the most likely concise final "
        "answer.";
    llm::ChatRequest request;
    request.model_id = options.model_id;
    request.temperature = options.temperature;
    request.messages = {{llm::Role::User, summary_prompt}};
    llm::ChatResponse response = gateway.complete(request, backend, options.cost_tag);
    ++result.llm_calls;
    result.cost_usd += response.cost_usd;
    result.fallback_used = true;
    result.answer = trim(response.text);
    return result;
}

}  // namespace wflow::react
