#include "wflow/mcts.hpp"
#include "wflow/util.hpp"

namespace wflow::mcts {

const char* critic_mode_name(CriticReport::Mode mode) {
    switch (mode) {
        case CriticReport::Mode::UltraConservative: return "ULTRA-CONSERVATIVE";
        case CriticReport::Mode::Conservative: return "CONSERVATIVE";
        case CriticReport::Mode::Moderate: return "MODERATE";
        case CriticReport::Mode::Aggressive: return "AGGRESSIVE";
    }
    return "AGGRESSIVE";
}

CriticReport run_critic(const SearchNode& node, const SearchConfig& cfg) {
    CriticReport report;
    report.round = node.round;
    report.score = node.median_score;
    report.errors = node.diag_counts;

    // structural analysis of the program
    report.steps = static_cast<int>(node.program.nodes.size());
    for (const auto& stmt : node.program.nodes) {
        switch (stmt.op) {
            case dsl::OperatorKind::ToolAgent: report.has_tool_agent = true; break;
            case dsl::OperatorKind::ScEnsemble:
            case dsl::OperatorKind::MdEnsemble: report.has_ensemble = true; break;
            case dsl::OperatorKind::Custom: ++report.custom_calls; break;
            default: break;
        }
        if (stmt.condition) ++report.conditionals;
    }
    report.overengineered = report.steps >= 5 || report.conditionals >= 2;

    // exploration history
    report.attempts = node.attempts();
    report.successes = node.successes();
    report.failures = node.failures();
    report.saturated = node.saturated();

    if (report.saturated)
        report.mode = CriticReport::Mode::UltraConservative;
    else if (node.median_score >= cfg.tau_high)
        report.mode = CriticReport::Mode::Conservative;
    else if (node.median_score >= cfg.tau_mid)
        report.mode = CriticReport::Mode::Moderate;
    else
        report.mode = CriticReport::Mode::Aggressive;

    switch (report.mode) {
        case CriticReport::Mode::UltraConservative:
            report.allowed = {"Single word or punctuation change in one prompt"};
            report.forbidden = {"Any structural change", "Adding or removing operators",
                                "Rewriting whole prompts",
                                "Keeping this parent: select a different node"};
            break;
        case CriticReport::Mode::Conservative:
            report.allowed = {"Minor prompt wording improvements",
                              "Add/remove one instruction line",
                              "Clarify unit conversion instructions"};
            report.forbidden = {"Adding new operators (ToolAgent, ScEnsemble)",
                                "Removing existing operators", "Changing workflow structure",
                                "Adding if/else conditional logic"};
            break;
        case CriticReport::Mode::Moderate:
            report.allowed = {"One structural change (insert or swap a single operator)",
                              "Prompt edits that sharpen the task"};
            report.forbidden = {"Multiple simultaneous structural changes",
                                "Adding new conditional branches"};
            break;
        case CriticReport::Mode::Aggressive:
            report.allowed = {"Structural changes", "New operators",
                              "ToolAgent additions", "Prompt rewrites"};
            report.forbidden = {"Exceeding 10 statements",
                                "Changing more than 5 statements at once"};
            break;
    }
    return report;
}

std::string CriticReport::render() const {
    std::string out;
    out += strf("=== SMART CRITIC REPORT (Round %d) ===\n", round);
    out += strf("Score: %.4f | Mode: %s\n\n", score, critic_mode_name(mode));

    int total = errors.total();
    out += "[ERROR ANALYSIS]\n";
    out += strf("  Total Errors: %d\n", total);
    auto pct = [&](int n) { return total > 0 ? 100.0 * n / total : 0.0; };
    out += strf("  - Format/Extraction: %d (%.0f%%)\n", errors.format, pct(errors.format));
    out += strf("  - Unit Mismatch: %d (%.0f%%)\n", errors.unit, pct(errors.unit));
    out += strf("  - Calculation/Value: %d (%.0f%%)\n\n", errors.value, pct(errors.value));

    out += "[WORKFLOW COMPLEXITY]\n";
    out += strf("  Steps: %d | ToolAgent: %s | Ensemble: %s\n", steps,
                has_tool_agent ? "Yes" : "No", has_ensemble ? "Yes" : "No");
    out += strf("  Conditionals: %s | Custom Calls: %d\n", conditionals > 0 ? "Yes" : "No",
                custom_calls);
    if (overengineered) out += "  Flag: over-engineered; consider simplification\n";
    out += "\n[EXPLORATION HISTORY]\n";
    out += strf("  Attempts: %d | Success: %d | Failure: %d\n", attempts, successes, failures);
    out += strf("  Node Saturated: %s\n\n", saturated ? "Yes" : "No");

    out += "[RECOMMENDATIONS]\n";
    switch (mode) {
        case Mode::UltraConservative:
            out += "  SATURATED NODE - DO NOT TOUCH STRUCTURE!\n";
            break;
        case Mode::Conservative: out += "  HIGH SCORE - BE VERY CAREFUL!\n"; break;
        case Mode::Moderate: out += "  MEDIUM SCORE - ONE FOCUSED CHANGE.\n"; break;
        case Mode::Aggressive: out += "  LOW SCORE - RESTRUCTURE FREELY.\n"; break;
    }
    out += "  [ALLOWED]\n";
    for (const auto& line : allowed) out += "  - " + line + "\n";
    out += "  [FORBIDDEN]\n";
    for (const auto& line : forbidden) out += "  - " + line + "\n";
    return out;
}

}  // namespace wflow::mcts
