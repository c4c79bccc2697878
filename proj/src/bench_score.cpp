#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "wflow/bench.hpp"
#include "wflow/score_tiers.hpp"
#include "wflow/util.hpp"

namespace wflow::bench {

nlohmann::json ScoreReport::to_json() const {
    nlohmann::json doc;
    doc["overall"] = overall;
    doc["sub_scores"] = nlohmann::json::object();
    for (const auto& [name, s] : sub_scores)
        doc["sub_scores"][name] = {{"score", s.score}, {"weight", s.weight}};
    if (!strategy_scores.empty()) {
        doc["strategy_scores"] = nlohmann::json::object();
        for (const auto& [name, s] : strategy_scores) doc["strategy_scores"][name] = s;
    }
    doc["diagnostics"] = nlohmann::json::array();
    for (const auto& d : diagnostics)
        doc["diagnostics"].push_back(
            {{"category", d.category}, {"field", d.field}, {"message", d.message}});
    return doc;
}

// --- shared numeric tiers -----------------------------------------------------

double relative_error_tier(double candidate, double reference) {
    double err;
    if (reference == 0.0)
        err = candidate == 0.0 ? 0.0 : 1.0;
    else
        err = std::fabs(candidate - reference) / std::fabs(reference);
    for (int i = 0; i < 4; ++i)
        if (err < tiers::kRelErrBound[i]) return tiers::kRelErrScore[i];
    return 0.0;
}

namespace {

// WCHW tiers, including the factor-of-1e3/1e6 and factor-of-2 detectors
double wchw_numeric_tier(double candidate, double reference, bool* unit_error) {
    if (unit_error) *unit_error = false;
    if (reference == 0.0) return candidate == 0.0 ? 1.0 : 0.0;
    double err = std::fabs(candidate - reference) / std::fabs(reference);
    for (int i = 0; i < 3; ++i)
        if (err < tiers::kKnowledgeRelErrBound[i]) return tiers::kKnowledgeRelErrScore[i];
    double ratio = candidate / reference;
    for (double k : {1e3, 1e6, 1e-3, 1e-6}) {
        if (ratio > 0 && std::fabs(ratio / k - 1.0) < 0.01) {
            if (unit_error) *unit_error = true;
            return tiers::kUnitFactorScore;
        }
    }
    for (double k : {2.0, 0.5}) {
        if (ratio > 0 && std::fabs(ratio / k - 1.0) < 0.01) return tiers::kDoubleFactorScore;
    }
    return 0.0;
}

std::string normalize_formula(const std::string& text) {
    std::string out;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '\\') {
            // drop \left \right, keep command names
            if (text.compare(i, 5, "\\left") == 0) {
                i += 4;
                continue;
            }
            if (text.compare(i, 6, "\\right") == 0) {
                i += 5;
                continue;
            }
            continue;
        }
        if (c == '$' || c == '{' || c == '}') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

double char_jaccard(const std::string& a, const std::string& b) {
    std::set<char> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 1.0;
    size_t inter = 0;
    for (char c : sa)
        if (sb.count(c)) ++inter;
    std::set<char> uni = sa;
    uni.insert(sb.begin(), sb.end());
    return static_cast<double>(inter) / static_cast<double>(uni.size());
}

double formula_score(const std::string& candidate, const std::string& reference) {
    std::string c = normalize_formula(candidate);
    std::string r = normalize_formula(reference);
    if (r.empty()) return 0.0;
    if (c == r) return 1.0;
    if (!c.empty() && (c.find(r) != std::string::npos || r.find(c) != std::string::npos))
        return 0.8;
    double j = char_jaccard(c, r);
    if (j > 0.7) return 0.8;
    if (j > 0.5) return 0.5;
    return 0.0;
}

double text_score(const std::string& candidate, const std::string& reference) {
    auto ref_numbers = extract_numbers(reference);
    auto cand_numbers = extract_numbers(candidate);
    double number_overlap = 1.0;
    if (!ref_numbers.empty()) {
        size_t matched = 0;
        for (const auto& rn : ref_numbers) {
            UnitValue rv = normalize_units(rn.value, rn.unit);
            for (const auto& cn : cand_numbers) {
                UnitValue cv = normalize_units(cn.value, cn.unit);
                double rvv = rv.value, cvv = cv.value;
                if (rvv == 0.0 ? cvv == 0.0 : std::fabs(cvv - rvv) / std::fabs(rvv) < 0.01) {
                    ++matched;
                    break;
                }
            }
        }
        number_overlap = static_cast<double>(matched) / static_cast<double>(ref_numbers.size());
    }
    auto ref_words = tokenize_words(reference);
    auto cand_words = tokenize_words(candidate);
    std::set<std::string> cand_set(cand_words.begin(), cand_words.end());
    double word_overlap = 1.0;
    if (!ref_words.empty()) {
        size_t matched = 0;
        for (const auto& w : ref_words)
            if (cand_set.count(w)) ++matched;
        word_overlap = static_cast<double>(matched) / static_cast<double>(ref_words.size());
    }
    double weighted = 0.6 * number_overlap + 0.4 * word_overlap;
    if (weighted > 0.8) return 1.0;
    if (weighted > 0.6) return 0.8;
    if (weighted > 0.4) return 0.5;
    return 0.0;
}

double code_sequence_score(const std::string& candidate, const std::string& reference) {
    auto strip = [](const std::string& s) {
        std::string out;
        for (char c : s)
            if (c == '0' || c == '1') out.push_back(c);
        return out;
    };
    std::string c = strip(candidate), r = strip(reference);
    if (r.empty()) return 0.0;
    if (c == r) return 1.0;
    if (c.size() != r.size()) return 0.0;
    size_t same = 0;
    for (size_t i = 0; i < r.size(); ++i)
        if (c[i] == r[i]) ++same;
    double sim = static_cast<double>(same) / static_cast<double>(r.size());
    if (sim > 0.9) return 0.8;
    if (sim > 0.7) return 0.5;
    return 0.0;
}

// best numeric tier over all candidate numbers against the reference's
// primary value, after unit normalization
double numeric_strategy(const std::string& candidate, const std::string& reference,
                        std::vector<Diag>* diags) {
    auto ref_numbers = extract_numbers(reference);
    if (ref_numbers.empty()) return 0.0;
    auto cand_numbers = extract_numbers(candidate);
    if (cand_numbers.empty()) {
        if (diags)
            diags->push_back({"format", "numeric", "no numeric value found in the answer"});
        return 0.0;
    }
    UnitValue ref_value = normalize_units(ref_numbers[0].value, ref_numbers[0].unit);
    double best = 0.0;
    bool any_unit_error = false;
    bool dimension_mismatch_seen = false;
    for (const auto& cn : cand_numbers) {
        UnitValue cv = normalize_units(cn.value, cn.unit);
        if (cv.recognized && ref_value.recognized && cv.dimension != ref_value.dimension) {
            dimension_mismatch_seen = true;
            continue;
        }
        bool unit_error = false;
        double tier = wchw_numeric_tier(cv.value, ref_value.value, &unit_error);
        if (tier > best) {
            best = tier;
            any_unit_error = unit_error;
        }
    }
    if (diags) {
        if (any_unit_error)
            diags->push_back({"unit", "numeric", "value off by a unit-prefix factor"});
        else if (best == 0.0 && dimension_mismatch_seen)
            diags->push_back({"unit", "numeric", "answer uses a different physical dimension"});
        else if (best == 0.0)
            diags->push_back({"value", "numeric", "numeric value outside every tolerance tier"});
    }
    return best;
}

}  // namespace

ScoreReport score_wchw(const std::string& candidate, const std::string& reference) {
    ScoreReport report;
    AnswerFormat format = classify_format(reference);
    bool numeric_ref = format == AnswerFormat::PureNumeric ||
                       format == AnswerFormat::NumericWithUnit ||
                       format == AnswerFormat::Scientific ||
                       format == AnswerFormat::Percentage || format == AnswerFormat::Ratio;
    bool text_ref = format == AnswerFormat::TextShort || format == AnswerFormat::TextLong;

    // strategy 1: format-aware matcher
    double format_aware = 0.0;
    switch (format) {
        case AnswerFormat::Formula: format_aware = formula_score(candidate, reference); break;
        case AnswerFormat::CodeSequence:
            format_aware = code_sequence_score(candidate, reference);
            break;
        case AnswerFormat::TextShort:
        case AnswerFormat::TextLong: format_aware = text_score(candidate, reference); break;
        default: format_aware = numeric_strategy(candidate, reference, nullptr); break;
    }
    report.strategy_scores["format_aware"] = format_aware;
    // the remaining strategies only fire when the reference is their kind,
    // so a stray digit in a formula cannot masquerade as a numeric hit
    report.strategy_scores["numeric"] =
        numeric_ref ? numeric_strategy(candidate, reference, &report.diagnostics) : 0.0;
    report.strategy_scores["formula"] =
        format == AnswerFormat::Formula ? formula_score(candidate, reference) : 0.0;
    report.strategy_scores["text"] = text_ref ? text_score(candidate, reference) : 0.0;

    report.overall = 0.0;
    for (const auto& [name, s] : report.strategy_scores) {
        (void)name;
        report.overall = std::max(report.overall, s);
    }
    report.sub_scores["overall"] = {report.overall, 1.0};
    return report;
}

// --- composite answer extraction ------------------------------------------------

namespace {

std::optional<std::string> extract_slice(const std::string& text) {
    static const std::regex labeled(R"([Ss]lice(?:\s*[Tt]ype)?\s*[:=]?\s*\**\s*(eMBB|URLLC|embb|urllc|EMBB))");
    std::smatch m;
    if (std::regex_search(text, m, labeled))
        return lowercase(m[1].str()) == "embb" ? std::string("eMBB") : std::string("URLLC");
    std::string lc = lowercase(text);
    size_t e = lc.find("embb"), u = lc.find("urllc");
    if (e == std::string::npos && u == std::string::npos) return std::nullopt;
    if (e == std::string::npos) return std::string("URLLC");
    if (u == std::string::npos) return std::string("eMBB");
    return e < u ? std::string("eMBB") : std::string("URLLC");
}

std::optional<int> extract_cqi(const std::string& text) {
    // accepts compound labels too ("CQI FROM RAY TRACING: 8", "CQI value = 8");
    // the last stated value wins so echoed question text cannot shadow it
    static const std::regex labeled(R"([Cc][Qq][Ii][^\d\n]{0,24}(\d{1,2}))");
    std::optional<int> found;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), labeled);
         it != std::sregex_iterator(); ++it) {
        int v = std::stoi((*it)[1].str());
        if (v >= 1 && v <= 15) found = v;
    }
    return found;
}

std::optional<double> extract_labeled_quantity(const std::string& text, const std::string& label,
                                               const std::string& dimension,
                                               double assumed_scale, bool* dimension_mismatch) {
    // labeled field first
    std::regex labeled(label + R"(\s*(?:allocation|allocated)?\s*[:=]?\s*\**\s*(-?\d[\d.,eE+-]*)\s*([a-zA-Z/]*))",
                       std::regex::icase);
    std::smatch m;
    std::string search = text;
    if (std::regex_search(search, m, labeled)) {
        std::string num = m[1].str();
        num.erase(std::remove(num.begin(), num.end(), ','), num.end());
        try {
            double value = std::stod(num);
            UnitValue uv = normalize_units(value, m[2].str());
            if (uv.recognized) {
                if (uv.dimension != dimension) {
                    if (dimension_mismatch) *dimension_mismatch = true;
                    return std::nullopt;
                }
                return uv.value;
            }
            return value * assumed_scale;  // unitless: assume the task's natural unit
        } catch (...) {
        }
    }
    // positional fallback: first number of the right dimension anywhere
    for (const auto& n : extract_numbers(text)) {
        UnitValue uv = normalize_units(n.value, n.unit);
        if (uv.recognized && uv.dimension == dimension) return uv.value;
    }
    return std::nullopt;
}

std::optional<bool> extract_qos(const std::string& text) {
    static const std::regex labeled(R"([Qq]o[Ss](?:\s*[Ss]atisfied)?\s*[:=]?\s*\**\s*([A-Za-z]+))");
    std::smatch m;
    if (std::regex_search(text, m, labeled)) {
        std::string v = lowercase(m[1].str());
        if (v == "yes" || v == "true" || v == "satisfied") return true;
        if (v == "no" || v == "false" || v == "unsatisfied" || v == "not") return false;
    }
    std::string lc = lowercase(text);
    if (lc.find("qos") != std::string::npos || lc.find("satisf") != std::string::npos) {
        if (lc.find("not satisfied") != std::string::npos ||
            lc.find("unsatisfied") != std::string::npos)
            return false;
        if (lc.find("satisfied") != std::string::npos) return true;
    }
    return std::nullopt;
}

std::optional<Point2> extract_position(const std::string& text) {
    static const std::regex pair_re(R"(\(\s*(-?\d+(?:\.\d+)?)\s*,\s*(-?\d+(?:\.\d+)?)\s*\))");
    for (const char* label : {"Predicted Position", "predicted position", "PREDICTED POSITION",
                              "Position", "position"}) {
        size_t p = text.find(label);
        if (p == std::string::npos) continue;
        std::string rest = text.substr(p);
        std::smatch m;
        if (std::regex_search(rest, m, pair_re))
            return Point2{std::stod(m[1].str()), std::stod(m[2].str())};
    }
    std::smatch m;
    if (std::regex_search(text, m, pair_re))
        return Point2{std::stod(m[1].str()), std::stod(m[2].str())};
    return std::nullopt;
}

double cqi_tier_wcns(int candidate, int reference) {
    int d = std::abs(candidate - reference);
    return d <= 4 ? tiers::kSlicingCqiScore[d] : 0.0;
}

double cqi_tier_wcmsa(int candidate, int reference) {
    int d = std::abs(candidate - reference);
    return d <= 3 ? tiers::kAssuranceCqiScore[d] : 0.0;
}

struct WeightedScore {
    double weighted_sum = 0.0;
    double weight_sum = 0.0;
    void add(ScoreReport& report, const std::string& name, double score, double weight) {
        report.sub_scores[name] = {score, weight};
        weighted_sum += score * weight;
        weight_sum += weight;
    }
    double overall() const { return weight_sum > 0.0 ? weighted_sum / weight_sum : 0.0; }
};

}  // namespace

ScoreReport score_wcns(const std::string& candidate, const nlohmann::json& reference) {
    ScoreReport report;
    WeightedScore total;

    std::string ref_slice = reference.at("slice").get<std::string>();
    int ref_cqi = reference.at("cqi").get<int>();
    double ref_bw = reference.at("bandwidth_mhz").get<double>();
    double ref_tp = reference.at("throughput_mbps").get<double>();

    auto slice = extract_slice(candidate);
    double slice_score = 0.0;
    if (!slice)
        report.diagnostics.push_back({"format", "slice", "slice type not found"});
    else
        slice_score = (*slice == ref_slice) ? 1.0 : 0.0;
    if (slice && slice_score == 0.0)
        report.diagnostics.push_back({"value", "slice", "wrong slice type"});
    total.add(report, "slice", slice_score, tiers::kSlicingWeights[0]);

    auto cqi = extract_cqi(candidate);
    double cqi_score = 0.0;
    if (!cqi)
        report.diagnostics.push_back({"format", "cqi", "CQI not found"});
    else {
        cqi_score = cqi_tier_wcns(*cqi, ref_cqi);
        if (cqi_score == 0.0)
            report.diagnostics.push_back({"value", "cqi", "CQI far from reference"});
    }
    total.add(report, "cqi", cqi_score, tiers::kSlicingWeights[1]);

    bool mismatch = false;
    auto bw = extract_labeled_quantity(candidate, "[Bb]andwidth", "frequency", 1e6, &mismatch);
    double bw_score = 0.0;
    if (!bw) {
        report.diagnostics.push_back(mismatch
                                         ? Diag{"unit", "bandwidth", "bandwidth in wrong dimension"}
                                         : Diag{"format", "bandwidth", "bandwidth not found"});
    } else {
        bw_score = relative_error_tier(*bw, ref_bw * 1e6);
        if (bw_score == 0.0)
            report.diagnostics.push_back({"value", "bandwidth", "bandwidth outside 20%"});
    }
    total.add(report, "bandwidth", bw_score, tiers::kSlicingWeights[2]);

    mismatch = false;
    auto tp = extract_labeled_quantity(candidate, "[Tt]hroughput", "data_rate", 1e6, &mismatch);
    double tp_score = 0.0;
    if (!tp) {
        report.diagnostics.push_back(
            mismatch ? Diag{"unit", "throughput", "throughput in wrong dimension"}
                     : Diag{"format", "throughput", "throughput not found"});
    } else {
        tp_score = relative_error_tier(*tp, ref_tp * 1e6);
        if (tp_score == 0.0)
            report.diagnostics.push_back({"value", "throughput", "throughput outside 20%"});
    }
    total.add(report, "throughput", tp_score, tiers::kSlicingWeights[3]);

    report.overall = total.overall();
    return report;
}

ScoreReport score_wcmsa(const std::string& candidate, const nlohmann::json& reference) {
    ScoreReport report;
    WeightedScore total;

    Point2 ref_pos{reference.at("position").at(0).get<double>(),
                   reference.at("position").at(1).get<double>()};
    int ref_cqi = reference.at("cqi").get<int>();
    std::string ref_slice = reference.at("slice").get<std::string>();
    double ref_bw = reference.at("bandwidth_mhz").get<double>();
    double ref_tp = reference.at("throughput_mbps").get<double>();
    bool ref_qos = reference.at("qos_satisfied").get<bool>();

    auto pos = extract_position(candidate);
    double pos_score = 0.0;
    if (!pos)
        report.diagnostics.push_back({"format", "position", "predicted position not found"});
    else {
        double d = dist2(*pos, ref_pos);
        pos_score = std::max(
            0.0, 1.0 - std::pow(d / tiers::kPositionZeroMeters, tiers::kPositionExponent));
        if (pos_score == 0.0)
            report.diagnostics.push_back({"value", "position", "prediction over 20 m away"});
    }
    total.add(report, "position", pos_score, tiers::kAssuranceWeights[0]);

    auto cqi = extract_cqi(candidate);
    double cqi_score = 0.0;
    if (!cqi)
        report.diagnostics.push_back({"format", "cqi", "CQI not found"});
    else {
        cqi_score = cqi_tier_wcmsa(*cqi, ref_cqi);
        if (cqi_score == 0.0)
            report.diagnostics.push_back({"value", "cqi", "CQI far from reference"});
    }
    total.add(report, "cqi", cqi_score, tiers::kAssuranceWeights[1]);

    auto slice = extract_slice(candidate);
    double slice_score = 0.0;
    if (!slice)
        report.diagnostics.push_back({"format", "slice", "slice type not found"});
    else
        slice_score = (*slice == ref_slice) ? 1.0 : 0.0;
    total.add(report, "slice", slice_score, tiers::kAssuranceWeights[2]);

    bool mismatch = false;
    auto bw = extract_labeled_quantity(candidate, "[Bb]andwidth", "frequency", 1e6, &mismatch);
    double bw_score = 0.0;
    if (!bw)
        report.diagnostics.push_back(mismatch
                                         ? Diag{"unit", "bandwidth", "bandwidth in wrong dimension"}
                                         : Diag{"format", "bandwidth", "bandwidth not found"});
    else
        bw_score = relative_error_tier(*bw, ref_bw * 1e6);
    total.add(report, "bandwidth", bw_score, tiers::kAssuranceWeights[3]);

    mismatch = false;
    auto tp = extract_labeled_quantity(candidate, "[Tt]hroughput", "data_rate", 1e6, &mismatch);
    double tp_score = 0.0;
    if (!tp)
        report.diagnostics.push_back(
            mismatch ? Diag{"unit", "throughput", "throughput in wrong dimension"}
                     : Diag{"format", "throughput", "throughput not found"});
    else
        tp_score = relative_error_tier(*tp, ref_tp * 1e6);
    total.add(report, "throughput", tp_score, tiers::kAssuranceWeights[4]);

    auto qos = extract_qos(candidate);
    double qos_score = 0.0;
    if (!qos)
        report.diagnostics.push_back({"format", "qos", "QoS verdict not found"});
    else
        qos_score = (*qos == ref_qos) ? 1.0 : 0.0;
    total.add(report, "qos", qos_score, tiers::kAssuranceWeights[5]);

    report.overall = total.overall();
    return report;
}

ScoreReport score_problem(const Problem& problem, const std::string& candidate) {
    switch (problem.benchmark) {
        case Benchmark::WCHW: return score_wchw(candidate, problem.reference_text);
        case Benchmark::WCNS: return score_wcns(candidate, problem.reference);
        case Benchmark::WCMSA: return score_wcmsa(candidate, problem.reference);
    }
    return {};
}

}  // namespace wflow::bench
