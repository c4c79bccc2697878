#include <algorithm>
#include <cctype>
#include <set>

#include "wflow/dsl.hpp"
#include "wflow/util.hpp"

namespace wflow::dsl {

namespace {

struct OpSpec {
    OperatorKind kind;
    // param name -> (kind, required); kind: 'd' data, 's' slot, 'n' number, 'l' list, 't' tool name
    std::vector<std::tuple<std::string, char, bool>> params;
};

const std::vector<OpSpec>& op_specs() {
    static const std::vector<OpSpec> specs = {
        {OperatorKind::Custom, {{"input", 'd', true}, {"prompt", 's', true}}},
        {OperatorKind::ToolAgent,
         {{"input", 'd', true}, {"strategy", 's', true}, {"max_steps", 'n', false}}},
        {OperatorKind::CodeLevel, {{"tool", 't', true}, {"input", 'd', true}}},
        {OperatorKind::ScEnsemble, {{"solutions", 'l', true}, {"question", 'd', true}}},
        {OperatorKind::MdEnsemble, {{"solutions", 'l', true}, {"question", 'd', true}}},
        {OperatorKind::Programmer, {{"problem", 'd', true}, {"analysis", 'd', false}}},
        {OperatorKind::Review, {{"problem", 'd', true}, {"solution", 'd', true}}},
        {OperatorKind::Revise,
         {{"problem", 'd', true}, {"solution", 'd', true}, {"feedback", 'd', true}}},
        {OperatorKind::Test,
         {{"problem", 'd', true}, {"solution", 'd', true}, {"cases", 'd', true}}},
        {OperatorKind::AnswerGenerate, {{"input", 'd', true}}},
        {OperatorKind::Format, {{"input", 'd', true}, {"instruction", 's', false}}},
        {OperatorKind::AnswerValidator, {{"input", 'd', true}}},
    };
    return specs;
}

const OpSpec& spec_for(OperatorKind kind) {
    for (const auto& s : op_specs())
        if (s.kind == kind) return s;
    throw std::logic_error("missing operator spec");
}

[[noreturn]] void fail(int line, int col, const std::string& message) {
    throw ParseError({line, col, message}, strf("line %d:%d: %s", line, col, message.c_str()));
}

struct Scanner {
    const std::string& text;
    size_t pos = 0;
    int line;

    explicit Scanner(const std::string& t, int line_no) : text(t), line(line_no) {}

    int col() const { return static_cast<int>(pos) + 1; }
    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool consume(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool consume_word(const std::string& w) {
        skip_ws();
        if (text.compare(pos, w.size(), w) == 0) {
            size_t end = pos + w.size();
            if (end >= text.size() || !(std::isalnum(static_cast<unsigned char>(text[end])) ||
                                        text[end] == '_')) {
                pos = end;
                return true;
            }
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        return text.substr(start, pos - start);
    }
    std::string string_literal() {
        skip_ws();
        if (text.compare(pos, 3, "\"\"\"") == 0) {
            size_t start = pos + 3;
            size_t end = text.find("\"\"\"", start);
            if (end == std::string::npos) fail(line, col(), "unterminated triple-quoted string");
            pos = end + 3;
            return text.substr(start, end - start);
        }
        if (pos >= text.size() || text[pos] != '"')
            fail(line, col(), "expected string literal");
        size_t start = ++pos;
        while (pos < text.size() && text[pos] != '"' && text[pos] != '\n') ++pos;
        if (pos >= text.size() || text[pos] != '"')
            fail(line, col(), "unterminated string literal");
        std::string out = text.substr(start, pos - start);
        ++pos;
        return out;
    }
    double number_literal() {
        skip_ws();
        size_t start = pos;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
                text[pos] == 'e' || text[pos] == 'E' ||
                ((text[pos] == '-' || text[pos] == '+') &&
                 (text[pos - 1] == 'e' || text[pos - 1] == 'E'))))
            ++pos;
        if (pos == start) fail(line, col(), "expected number");
        return std::stod(text.substr(start, pos - start));
    }
};

ArgValue parse_value(Scanner& sc, char expected_kind);

ArgValue parse_scalar(Scanner& sc, char expected_kind) {
    char c = sc.peek();
    if (c == '"') return ArgValue::string(sc.string_literal());
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+')
        return ArgValue::number(sc.number_literal());
    std::string name = sc.ident();
    if (name.empty()) fail(sc.line, sc.col(), "expected value");
    if (name == "problem") return ArgValue::problem();
    if (expected_kind == 's') return ArgValue::slot(name);
    if (expected_kind == 't') return ArgValue::string(name);
    std::string field;
    if (sc.consume('.')) {
        field = sc.ident();
        if (field.empty()) fail(sc.line, sc.col(), "expected field name after '.'");
    }
    return ArgValue::ref(name, field);
}

ArgValue parse_value(Scanner& sc, char expected_kind) {
    if (sc.peek() == '[') {
        sc.consume('[');
        std::vector<ArgValue> items;
        if (!sc.consume(']')) {
            while (true) {
                items.push_back(parse_scalar(sc, 'd'));
                if (sc.consume(']')) break;
                if (!sc.consume(','))
                    fail(sc.line, sc.col(), "expected ',' or ']' in list");
            }
        }
        return ArgValue::list(std::move(items));
    }
    return parse_scalar(sc, expected_kind);
}

Condition parse_condition(Scanner& sc) {
    Condition cond;
    if (sc.consume('!')) cond.kind = Condition::Kind::Absent;
    cond.ref_id = sc.ident();
    if (cond.ref_id.empty()) fail(sc.line, sc.col(), "expected statement reference after 'if'");
    if (sc.consume('.')) {
        cond.ref_field = sc.ident();
        if (cond.ref_field.empty()) fail(sc.line, sc.col(), "expected field name after '.'");
    }
    if (cond.kind != Condition::Kind::Absent) {
        if (sc.consume('=')) {
            if (!sc.consume('=')) fail(sc.line, sc.col(), "expected '==' in condition");
            cond.kind = Condition::Kind::Equals;
            cond.literal = sc.string_literal();
        } else {
            cond.kind = Condition::Kind::Present;
        }
    }
    return cond;
}

// fold lines so a multi-line triple-quoted string becomes one logical line
std::vector<std::pair<int, std::string>> logical_lines(const std::string& source) {
    std::vector<std::string> raw = split(source, '\n');
    std::vector<std::pair<int, std::string>> out;
    for (size_t i = 0; i < raw.size(); ++i) {
        std::string line = raw[i];
        int line_no = static_cast<int>(i) + 1;
        size_t quotes = 0;
        for (size_t p = line.find("\"\"\""); p != std::string::npos;
             p = line.find("\"\"\"", p + 3))
            ++quotes;
        while (quotes % 2 == 1 && i + 1 < raw.size()) {
            ++i;
            line += "\n" + raw[i];
            quotes = 0;
            for (size_t p = line.find("\"\"\""); p != std::string::npos;
                 p = line.find("\"\"\"", p + 3))
                ++quotes;
        }
        if (quotes % 2 == 1) fail(line_no, 1, "unterminated triple-quoted string");
        out.emplace_back(line_no, line);
    }
    return out;
}

void check_data_value(const ArgValue& v, const std::set<std::string>& known_ids, int line,
                      const std::string& stmt_id) {
    switch (v.kind) {
        case ArgValue::Kind::Ref:
            if (!known_ids.count(v.ref_id))
                fail(line, 1,
                     strf("statement '%s' references '%s' which is not an earlier statement",
                          stmt_id.c_str(), v.ref_id.c_str()));
            break;
        case ArgValue::Kind::List:
            for (const auto& item : v.items) check_data_value(item, known_ids, line, stmt_id);
            break;
        default:
            break;
    }
}

}  // namespace

const char* operator_name(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Custom: return "custom";
        case OperatorKind::ToolAgent: return "tool_agent";
        case OperatorKind::CodeLevel: return "code_level";
        case OperatorKind::ScEnsemble: return "sc_ensemble";
        case OperatorKind::MdEnsemble: return "md_ensemble";
        case OperatorKind::Programmer: return "programmer";
        case OperatorKind::Review: return "review";
        case OperatorKind::Revise: return "revise";
        case OperatorKind::Test: return "test";
        case OperatorKind::AnswerGenerate: return "answer_generate";
        case OperatorKind::Format: return "format";
        case OperatorKind::AnswerValidator: return "answer_validator";
    }
    return "custom";
}

std::optional<OperatorKind> operator_from_name(const std::string& name) {
    for (const auto& s : op_specs())
        if (name == operator_name(s.kind)) return s.kind;
    return std::nullopt;
}

ArgValue ArgValue::string(std::string s) {
    ArgValue v;
    v.kind = Kind::String;
    v.str = std::move(s);
    return v;
}
ArgValue ArgValue::number(double n) {
    ArgValue v;
    v.kind = Kind::Number;
    v.num = n;
    return v;
}
ArgValue ArgValue::problem() {
    ArgValue v;
    v.kind = Kind::ProblemInput;
    return v;
}
ArgValue ArgValue::ref(std::string id, std::string field) {
    ArgValue v;
    v.kind = Kind::Ref;
    v.ref_id = std::move(id);
    v.ref_field = std::move(field);
    return v;
}
ArgValue ArgValue::slot(std::string name) {
    ArgValue v;
    v.kind = Kind::SlotName;
    v.str = std::move(name);
    return v;
}
ArgValue ArgValue::list(std::vector<ArgValue> items) {
    ArgValue v;
    v.kind = Kind::List;
    v.items = std::move(items);
    return v;
}

bool ArgValue::operator==(const ArgValue& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::String:
        case Kind::SlotName: return str == other.str;
        case Kind::Number: return num == other.num;
        case Kind::ProblemInput: return true;
        case Kind::Ref: return ref_id == other.ref_id && ref_field == other.ref_field;
        case Kind::List: return items == other.items;
    }
    return false;
}

bool Statement::operator==(const Statement& other) const {
    return id == other.id && op == other.op && args == other.args &&
           condition == other.condition;
}

const Statement* WorkflowProgram::terminal() const {
    if (nodes.empty()) return nullptr;
    if (!answer_id.empty()) {
        const Statement* s = find(answer_id);
        if (s) return s;
    }
    return &nodes.back();
}

const Statement* WorkflowProgram::find(const std::string& id) const {
    for (const auto& s : nodes)
        if (s.id == id) return &s;
    return nullptr;
}

WorkflowProgram parse(const std::string& source) {
    WorkflowProgram program;
    std::set<std::string> ids;

    for (const auto& [line_no, line] : logical_lines(source)) {
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        Scanner sc(line, line_no);
        if (sc.peek() == '#') continue;

        if (sc.consume_word("model")) {
            program.model_id = sc.string_literal();
            continue;
        }
        if (sc.consume_word("temperature")) {
            program.temperature = sc.number_literal();
            if (program.temperature < 0.0) fail(line_no, 1, "temperature must be >= 0");
            continue;
        }
        if (sc.consume_word("format")) {
            program.output_format = sc.string_literal();
            continue;
        }
        if (sc.consume_word("prompt")) {
            std::string name = sc.ident();
            if (name.empty()) fail(line_no, sc.col(), "expected prompt slot name");
            if (!sc.consume('=')) fail(line_no, sc.col(), "expected '=' after slot name");
            std::string text = sc.string_literal();
            if (text.find('{') != std::string::npos || text.find('}') != std::string::npos)
                fail(line_no, 1,
                     strf("prompt slot '%s' must not contain placeholder braces", name.c_str()));
            if (program.prompt_slots.count(name))
                fail(line_no, 1, strf("duplicate prompt slot '%s'", name.c_str()));
            program.prompt_slots[name] = text;
            continue;
        }
        if (sc.consume_word("answer")) {
            std::string id = sc.ident();
            if (id.empty()) fail(line_no, sc.col(), "expected statement id after 'answer'");
            program.answer_id = id;
            continue;
        }

        // statement: id = op(arg=value, ...) [if cond]
        Statement stmt;
        stmt.id = sc.ident();
        if (stmt.id.empty()) fail(line_no, sc.col(), "expected statement id");
        if (stmt.id == "problem" || stmt.id == "answer" || stmt.id == "prompt")
            fail(line_no, 1, strf("'%s' is a reserved word", stmt.id.c_str()));
        if (!sc.consume('=')) fail(line_no, sc.col(), "expected '=' after statement id");
        std::string op = sc.ident();
        auto kind = operator_from_name(op);
        if (!kind) fail(line_no, 1, strf("unknown operator '%s'", op.c_str()));
        stmt.op = *kind;
        const OpSpec& spec = spec_for(stmt.op);
        if (!sc.consume('(')) fail(line_no, sc.col(), "expected '(' after operator name");
        if (!sc.consume(')')) {
            while (true) {
                std::string pname = sc.ident();
                if (pname.empty()) fail(line_no, sc.col(), "expected parameter name");
                auto pit = std::find_if(spec.params.begin(), spec.params.end(),
                                        [&](const auto& p) { return std::get<0>(p) == pname; });
                if (pit == spec.params.end())
                    fail(line_no, 1,
                         strf("operator '%s' has no parameter '%s'", op.c_str(), pname.c_str()));
                if (!sc.consume('=')) fail(line_no, sc.col(), "expected '=' after parameter name");
                ArgValue value = parse_value(sc, std::get<1>(*pit));
                char pkind = std::get<1>(*pit);
                if (pkind == 'l' && value.kind != ArgValue::Kind::List)
                    fail(line_no, 1, strf("parameter '%s' expects a list", pname.c_str()));
                if (pkind == 'n' && value.kind != ArgValue::Kind::Number)
                    fail(line_no, 1, strf("parameter '%s' expects a number", pname.c_str()));
                if (pkind == 's' && value.kind != ArgValue::Kind::SlotName)
                    fail(line_no, 1, strf("parameter '%s' expects a prompt slot", pname.c_str()));
                if (stmt.args.count(pname))
                    fail(line_no, 1, strf("duplicate parameter '%s'", pname.c_str()));
                if (pname == "max_steps" &&
                    (value.num < 1.0 || value.num != std::floor(value.num)))
                    fail(line_no, 1, "max_steps must be a positive integer");
                stmt.args[pname] = std::move(value);
                if (sc.consume(')')) break;
                if (!sc.consume(',')) fail(line_no, sc.col(), "expected ',' or ')'");
            }
        }
        if (sc.consume_word("if")) stmt.condition = parse_condition(sc);
        if (!sc.eof()) fail(line_no, sc.col(), "unexpected trailing input");

        // required params
        for (const auto& [pname, pkind, required] : spec.params) {
            (void)pkind;
            if (required && !stmt.args.count(pname))
                fail(line_no, 1,
                     strf("operator '%s' requires parameter '%s'", op.c_str(), pname.c_str()));
        }

        if (ids.count(stmt.id)) fail(line_no, 1, strf("duplicate statement id '%s'", stmt.id.c_str()));
        // references must point at earlier statements (keeps the graph acyclic)
        for (const auto& [pname, value] : stmt.args) {
            (void)pname;
            check_data_value(value, ids, line_no, stmt.id);
            if (value.kind == ArgValue::Kind::SlotName && !program.prompt_slots.count(value.str))
                fail(line_no, 1, strf("unknown prompt slot '%s'", value.str.c_str()));
        }
        if (stmt.condition && !ids.count(stmt.condition->ref_id))
            fail(line_no, 1,
                 strf("condition references '%s' which is not an earlier statement",
                      stmt.condition->ref_id.c_str()));

        ids.insert(stmt.id);
        program.nodes.push_back(std::move(stmt));
        if (static_cast<int>(program.nodes.size()) > kMaxNodes)
            fail(line_no, 1, strf("graph too large: more than %d statements", kMaxNodes));
    }

    if (!program.answer_id.empty() && !program.find(program.answer_id))
        fail(0, 0, strf("answer references unknown statement '%s'", program.answer_id.c_str()));
    return program;
}

namespace {

std::string render_number(double v) {
    if (v == static_cast<long long>(v) && std::fabs(v) < 1e15)
        return strf("%lld", static_cast<long long>(v));
    return strf("%.17g", v);
}

std::string render_string(const std::string& s) {
    if (s.find('"') != std::string::npos || s.find('\n') != std::string::npos)
        return "\"\"\"" + s + "\"\"\"";
    return "\"" + s + "\"";
}

std::string render_value(const ArgValue& v) {
    switch (v.kind) {
        case ArgValue::Kind::String: return render_string(v.str);
        case ArgValue::Kind::SlotName: return v.str;
        case ArgValue::Kind::Number: return render_number(v.num);
        case ArgValue::Kind::ProblemInput: return "problem";
        case ArgValue::Kind::Ref:
            return v.ref_field.empty() ? v.ref_id : v.ref_id + "." + v.ref_field;
        case ArgValue::Kind::List: {
            std::string out = "[";
            for (size_t i = 0; i < v.items.size(); ++i)
                out += (i ? ", " : "") + render_value(v.items[i]);
            return out + "]";
        }
    }
    return "";
}

std::string render_tool_value(const ArgValue& v) {
    // bare name form keeps canonical text stable
    return v.str;
}

}  // namespace

std::string serialize(const WorkflowProgram& program) {
    std::string out;
    if (program.model_id != "executor") out += "model " + render_string(program.model_id) + "\n";
    if (program.temperature != 0.0)
        out += "temperature " + render_number(program.temperature) + "\n";
    if (program.output_format != "text")
        out += "format " + render_string(program.output_format) + "\n";
    for (const auto& [name, text] : program.prompt_slots)
        out += "prompt " + name + " = " + render_string(text) + "\n";
    for (const auto& stmt : program.nodes) {
        out += stmt.id + " = " + operator_name(stmt.op) + "(";
        const OpSpec& spec = spec_for(stmt.op);
        bool first = true;
        for (const auto& [pname, pkind, required] : spec.params) {
            (void)required;
            auto it = stmt.args.find(pname);
            if (it == stmt.args.end()) continue;
            if (!first) out += ", ";
            first = false;
            out += pname + "=" +
                   (pkind == 't' ? render_tool_value(it->second) : render_value(it->second));
        }
        out += ")";
        if (stmt.condition) {
            out += " if ";
            if (stmt.condition->kind == Condition::Kind::Absent) out += "!";
            out += stmt.condition->ref_id;
            if (!stmt.condition->ref_field.empty()) out += "." + stmt.condition->ref_field;
            if (stmt.condition->kind == Condition::Kind::Equals)
                out += " == " + render_string(stmt.condition->literal);
        }
        out += "\n";
    }
    if (!program.answer_id.empty()) out += "answer " + program.answer_id + "\n";
    return out;
}

namespace {

nlohmann::json value_to_json(const ArgValue& v) {
    using nlohmann::json;
    switch (v.kind) {
        case ArgValue::Kind::String: return json{{"kind", "string"}, {"value", v.str}};
        case ArgValue::Kind::SlotName: return json{{"kind", "slot"}, {"name", v.str}};
        case ArgValue::Kind::Number: return json{{"kind", "number"}, {"value", v.num}};
        case ArgValue::Kind::ProblemInput: return json{{"kind", "problem"}};
        case ArgValue::Kind::Ref: {
            json j{{"kind", "ref"}, {"id", v.ref_id}};
            if (!v.ref_field.empty()) j["field"] = v.ref_field;
            return j;
        }
        case ArgValue::Kind::List: {
            json items = json::array();
            for (const auto& item : v.items) items.push_back(value_to_json(item));
            return json{{"kind", "list"}, {"items", items}};
        }
    }
    return nullptr;
}

ArgValue value_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "string") return ArgValue::string(j.at("value").get<std::string>());
    if (kind == "slot") return ArgValue::slot(j.at("name").get<std::string>());
    if (kind == "number") return ArgValue::number(j.at("value").get<double>());
    if (kind == "problem") return ArgValue::problem();
    if (kind == "ref")
        return ArgValue::ref(j.at("id").get<std::string>(), j.value("field", std::string()));
    if (kind == "list") {
        std::vector<ArgValue> items;
        for (const auto& item : j.at("items")) items.push_back(value_from_json(item));
        return ArgValue::list(std::move(items));
    }
    throw std::runtime_error("unknown arg value kind: " + kind);
}

}  // namespace

nlohmann::json program_to_json(const WorkflowProgram& program) {
    using nlohmann::json;
    json doc;
    doc["model"] = program.model_id;
    doc["temperature"] = program.temperature;
    doc["format"] = program.output_format;
    doc["prompts"] = json::object();
    for (const auto& [name, text] : program.prompt_slots) doc["prompts"][name] = text;
    doc["nodes"] = json::array();
    for (const auto& stmt : program.nodes) {
        json node;
        node["id"] = stmt.id;
        node["op"] = operator_name(stmt.op);
        node["args"] = json::object();
        for (const auto& [pname, value] : stmt.args) node["args"][pname] = value_to_json(value);
        if (stmt.condition) {
            json cond;
            cond["kind"] = stmt.condition->kind == Condition::Kind::Present   ? "present"
                           : stmt.condition->kind == Condition::Kind::Absent ? "absent"
                                                                             : "equals";
            cond["id"] = stmt.condition->ref_id;
            if (!stmt.condition->ref_field.empty()) cond["field"] = stmt.condition->ref_field;
            if (stmt.condition->kind == Condition::Kind::Equals)
                cond["literal"] = stmt.condition->literal;
            node["condition"] = cond;
        }
        doc["nodes"].push_back(node);
    }
    if (!program.answer_id.empty()) doc["answer"] = program.answer_id;
    doc["meta"] = json{{"round", program.meta.round}, {"parent_round", program.meta.parent_round}};
    return doc;
}

WorkflowProgram program_from_json(const nlohmann::json& doc) {
    WorkflowProgram program;
    program.model_id = doc.value("model", std::string("executor"));
    program.temperature = doc.value("temperature", 0.0);
    program.output_format = doc.value("format", std::string("text"));
    nlohmann::json prompts = doc.value("prompts", nlohmann::json::object());
    for (const auto& kv : prompts.items())
        program.prompt_slots[kv.key()] = kv.value().get<std::string>();
    for (const auto& node : doc.value("nodes", nlohmann::json::array())) {
        Statement stmt;
        stmt.id = node.at("id").get<std::string>();
        auto kind = operator_from_name(node.at("op").get<std::string>());
        if (!kind) throw std::runtime_error("unknown operator in json program");
        stmt.op = *kind;
        nlohmann::json args = node.value("args", nlohmann::json::object());
        for (const auto& kv : args.items())
            stmt.args[kv.key()] = value_from_json(kv.value());
        if (node.contains("condition")) {
            const auto& c = node["condition"];
            Condition cond;
            std::string k = c.at("kind").get<std::string>();
            cond.kind = k == "present"  ? Condition::Kind::Present
                        : k == "absent" ? Condition::Kind::Absent
                                        : Condition::Kind::Equals;
            cond.ref_id = c.at("id").get<std::string>();
            cond.ref_field = c.value("field", std::string());
            cond.literal = c.value("literal", std::string());
            stmt.condition = cond;
        }
        program.nodes.push_back(std::move(stmt));
    }
    program.answer_id = doc.value("answer", std::string());
    if (doc.contains("meta")) {
        program.meta.round = doc["meta"].value("round", 0);
        program.meta.parent_round = doc["meta"].value("parent_round", 0);
    }
    return program;
}

int statement_diff(const WorkflowProgram& before, const WorkflowProgram& after) {
    int diff = 0;
    for (const auto& a : after.nodes) {
        const Statement* b = before.find(a.id);
        if (!b)
            ++diff;  // insertion
        else if (!(*b == a))
            ++diff;  // modification
    }
    for (const auto& b : before.nodes)
        if (!after.find(b.id)) ++diff;  // deletion
    for (const auto& [name, text] : after.prompt_slots) {
        auto it = before.prompt_slots.find(name);
        if (it == before.prompt_slots.end() || it->second != text) ++diff;
    }
    for (const auto& [name, text] : before.prompt_slots) {
        (void)text;
        if (!after.prompt_slots.count(name)) ++diff;
    }
    return diff;
}

}  // namespace wflow::dsl
