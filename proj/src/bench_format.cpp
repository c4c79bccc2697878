#include <array>
#include <cctype>
#include <regex>

#include "wflow/bench.hpp"
#include "wflow/util.hpp"

namespace wflow::bench {

const char* benchmark_name(Benchmark b) {
    switch (b) {
        case Benchmark::WCHW: return "WCHW";
        case Benchmark::WCNS: return "WCNS";
        case Benchmark::WCMSA: return "WCMSA";
    }
    return "WCHW";
}

std::optional<Benchmark> benchmark_from_name(const std::string& name) {
    std::string up;
    for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "WCHW") return Benchmark::WCHW;
    if (up == "WCNS") return Benchmark::WCNS;
    if (up == "WCMSA") return Benchmark::WCMSA;
    return std::nullopt;
}

nlohmann::json Problem::to_json() const {
    nlohmann::json doc;
    doc["id"] = id;
    doc["benchmark"] = benchmark_name(benchmark);
    doc["question"] = question;
    doc["reference_text"] = reference_text;
    doc["reference"] = reference;
    doc["cot"] = cot;
    doc["metadata"] = metadata;
    return doc;
}

Problem Problem::from_json(const nlohmann::json& doc) {
    Problem p;
    p.id = doc.at("id").get<std::string>();
    auto b = benchmark_from_name(doc.at("benchmark").get<std::string>());
    if (!b) throw std::runtime_error("unknown benchmark in problem " + p.id);
    p.benchmark = *b;
    p.question = doc.at("question").get<std::string>();
    p.reference_text = doc.value("reference_text", std::string());
    p.reference = doc.value("reference", nlohmann::json::object());
    p.cot = doc.value("cot", std::string());
    p.metadata = doc.value("metadata", nlohmann::json::object());
    return p;
}

std::vector<Problem> read_jsonl(const std::string& path) {
    std::vector<Problem> out;
    for (const auto& line : split(read_file(path), '\n')) {
        std::string t = trim(line);
        if (t.empty()) continue;
        out.push_back(Problem::from_json(nlohmann::json::parse(t)));
    }
    return out;
}

void write_jsonl(const std::string& path, const std::vector<Problem>& problems) {
    std::string out;
    for (const auto& p : problems) out += p.to_json().dump() + "\n";
    write_file(path, out);
}

// --- unit table ---------------------------------------------------------------

namespace {

struct UnitRow {
    const char* unit;
    const char* dimension;
    double multiplier;   // NAN means formula-based (dBm/dBW)
};

// 38 recognized units across six dimensions; dBm/dBW convert via formula
const std::array<UnitRow, 38>& unit_rows() {
    static const std::array<UnitRow, 38> rows = {{
        {"hz", "frequency", 1.0},
        {"khz", "frequency", 1e3},
        {"mhz", "frequency", 1e6},
        {"ghz", "frequency", 1e9},
        {"thz", "frequency", 1e12},
        {"bps", "data_rate", 1.0},
        {"kbps", "data_rate", 1e3},
        {"mbps", "data_rate", 1e6},
        {"gbps", "data_rate", 1e9},
        {"tbps", "data_rate", 1e12},
        {"bit/s", "data_rate", 1.0},
        {"kbit/s", "data_rate", 1e3},
        {"mbit/s", "data_rate", 1e6},
        {"gbit/s", "data_rate", 1e9},
        {"tbit/s", "data_rate", 1e12},
        {"w", "power", 1.0},
        {"mw", "power", 1e-3},
        {"uw", "power", 1e-6},
        {"kw", "power", 1e3},
        {"dbm", "power", 0.0},
        {"dbw", "power", 0.0},
        {"s", "time", 1.0},
        {"ms", "time", 1e-3},
        {"us", "time", 1e-6},
        {"ns", "time", 1e-9},
        {"ps", "time", 1e-12},
        {"min", "time", 60.0},
        {"h", "time", 3600.0},
        {"m", "distance", 1.0},
        {"km", "distance", 1e3},
        {"cm", "distance", 1e-2},
        {"mm", "distance", 1e-3},
        {"um", "distance", 1e-6},
        {"nm", "distance", 1e-9},
        {"bps/hz", "spectral_efficiency", 1.0},
        {"bit/s/hz", "spectral_efficiency", 1.0},
        {"b/s/hz", "spectral_efficiency", 1.0},
        {"bits/s/hz", "spectral_efficiency", 1.0},
    }};
    return rows;
}

std::string normalize_unit_token(const std::string& unit) {
    std::string out;
    for (char c : unit) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isalnum(u) || c == '/') out.push_back(static_cast<char>(std::tolower(u)));
    }
    // Greek mu variants
    size_t p;
    while ((p = out.find("\xce\xbc")) != std::string::npos) out.replace(p, 2, "u");
    return out;
}

}  // namespace

size_t unit_table_size() { return unit_rows().size(); }

UnitValue normalize_units(double value, const std::string& unit) {
    std::string token = normalize_unit_token(unit);
    if (token.empty()) return {value, "dimensionless", false};
    // "mbps" written as "Mb/s" etc.
    if (token == "mb/s") token = "mbit/s";
    if (token == "kb/s") token = "kbit/s";
    if (token == "gb/s") token = "gbit/s";
    for (const auto& row : unit_rows()) {
        if (token != row.unit) continue;
        if (token == "dbm") return {std::pow(10.0, (value - 30.0) / 10.0), row.dimension, true};
        if (token == "dbw") return {std::pow(10.0, value / 10.0), row.dimension, true};
        return {value * row.multiplier, row.dimension, true};
    }
    return {value, "dimensionless", false};
}

// --- number extraction ----------------------------------------------------------

namespace {

// number with optional scientific notation (both e-notation and x10^k forms)
const std::regex kNumberRe(
    R"((-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)(?:\s*[xX*]\s*10\s*(?:\^|\*\*)?\s*(?:\{)?(-?\d+)(?:\})?)?)");

bool is_unit_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '/' || c == '%';
}

// fold the typographic forms of scientific notation into ASCII:
// multiplication signs become 'x' and superscript exponents become ^-style
std::string ascii_fold(const std::string& text) {
    static const std::vector<std::pair<std::string, std::string>> superscripts = {
        {"⁰", "0"}, {"¹", "1"}, {"²", "2"}, {"³", "3"}, {"⁴", "4"},
        {"⁵", "5"}, {"⁶", "6"}, {"⁷", "7"}, {"⁸", "8"}, {"⁹", "9"},
        {"⁻", "-"}, {"⁺", "+"}};
    std::string out;
    out.reserve(text.size());
    bool in_superscript = false;
    for (size_t i = 0; i < text.size();) {
        if (text.compare(i, 2, "×") == 0) {  // multiplication sign
            out.push_back('x');
            i += 2;
            in_superscript = false;
            continue;
        }
        bool matched = false;
        for (const auto& [sequence, replacement] : superscripts) {
            if (text.compare(i, sequence.size(), sequence) == 0) {
                if (!in_superscript) out.push_back('^');
                in_superscript = true;
                out += replacement;
                i += sequence.size();
                matched = true;
                break;
            }
        }
        if (matched) continue;
        in_superscript = false;
        out.push_back(text[i]);
        ++i;
    }
    return out;
}

}  // namespace

std::vector<NumberWithUnit> extract_numbers(const std::string& raw_text) {
    std::string text = ascii_fold(raw_text);
    std::vector<NumberWithUnit> out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), kNumberRe);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        const std::smatch& m = *it;
        if (m[1].str().empty()) continue;
        NumberWithUnit n;
        n.value = std::stod(m[1].str());
        if (m[2].matched) n.value *= std::pow(10.0, std::stod(m[2].str()));
        // unit = run of letters (or %) right after the number
        size_t pos = static_cast<size_t>(m.position(0) + m.length(0));
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
        size_t unit_start = pos;
        while (pos < text.size() && is_unit_char(text[pos])) ++pos;
        std::string unit = text.substr(unit_start, pos - unit_start);
        // exclude trailing word characters that are clearly prose
        if (unit.size() > 12) unit.clear();
        n.unit = unit;
        out.push_back(n);
    }
    return out;
}

// --- format classification -------------------------------------------------------

const char* format_name(AnswerFormat f) {
    switch (f) {
        case AnswerFormat::PureNumeric: return "PureNumeric";
        case AnswerFormat::NumericWithUnit: return "NumericWithUnit";
        case AnswerFormat::Scientific: return "Scientific";
        case AnswerFormat::Formula: return "Formula";
        case AnswerFormat::Percentage: return "Percentage";
        case AnswerFormat::TextShort: return "TextShort";
        case AnswerFormat::TextLong: return "TextLong";
        case AnswerFormat::CodeSequence: return "CodeSequence";
        case AnswerFormat::Ratio: return "Ratio";
    }
    return "TextLong";
}

AnswerFormat classify_format(const std::string& reference) {
    std::string t = ascii_fold(trim(reference));
    if (t.empty()) return AnswerFormat::TextLong;

    static const std::regex formula_re(R"(^[^=]{0,40}[a-zA-Z)\]]\s*\(?[a-zA-Z0-9,\s]*\)?\s*=)");
    static const std::regex sci_re(R"(\d\s*(?:[eE][-+]?\d+|[xX*]\s*10))");
    static const std::regex pct_re(R"(^-?\d+(\.\d+)?\s*%$)");
    static const std::regex ratio_re(R"(^\d+(\.\d+)?\s*[:/]\s*\d+(\.\d+)?$)");
    static const std::regex code_re(R"(^[01]{2,}(\s+[01]{2,})+$|^[01]{3,}$)");
    static const std::regex pure_num_re(R"(^-?\d+(\.\d+)?$)");
    static const std::regex num_unit_re(R"(^-?\d+(\.\d+)?([eE][-+]?\d+)?\s*[a-zA-Zµ%][a-zA-Z/%]*$)");

    if (std::regex_search(t, formula_re) && t.find('=') != std::string::npos)
        return AnswerFormat::Formula;
    if (std::regex_search(t, sci_re)) return AnswerFormat::Scientific;
    if (std::regex_match(t, pct_re)) return AnswerFormat::Percentage;
    if (std::regex_match(t, ratio_re)) return AnswerFormat::Ratio;
    if (std::regex_match(t, code_re)) return AnswerFormat::CodeSequence;
    if (std::regex_match(t, pure_num_re)) return AnswerFormat::PureNumeric;
    if (std::regex_match(t, num_unit_re)) return AnswerFormat::NumericWithUnit;
    return tokenize_words(t).size() <= 6 ? AnswerFormat::TextShort : AnswerFormat::TextLong;
}

}  // namespace wflow::bench
