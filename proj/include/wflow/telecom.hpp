#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace wflow::telecom {

class UnknownOperationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- precision calculator -------------------------------------------------

using CalcArgs = std::map<std::string, double>;

struct CalcOperation {
    std::string name;
    std::vector<std::string> args;
    std::string description;
};

const std::vector<CalcOperation>& calc_operations();

// Dispatch by operation name; throws UnknownOperationError / DomainError.
double calc(const std::string& operation, const CalcArgs& args);

double q_function(double x);
double q_inverse(double p);  // p in (0,1)
double erfc_inverse(double p);

// Marcum Q1: series expansion first (<=100 terms, 1e-15 threshold), numerical
// integration fallback with upper limit max(b+20, a+20, 50).
double marcum_q1(double a, double b);
double marcum_q1_series(double a, double b, bool* converged = nullptr);
double marcum_q1_integral(double a, double b);

double db_to_linear(double db);
double linear_to_db(double x);

// --- formula retrieval ----------------------------------------------------

struct FormulaEntry {
    std::string id;
    std::string name;
    std::string latex;
    std::string notes;
    std::string category;
    std::vector<std::pair<std::string, std::string>> variables;  // symbol -> meaning
    std::vector<std::string> keywords;                           // lowercase
    bool reconstructed = false;
};

struct MatchFlags {
    bool keyword = false;
    bool name = false;
    bool notes = false;
    bool tex = false;
    bool category = false;
    // weighted relevance: 2.0 kw + 1.5 name + 0.5 notes + 0.3 tex + 1.0 cat
    double score() const {
        return 2.0 * keyword + 1.5 * name + 0.5 * notes + 0.3 * tex + 1.0 * category;
    }
};

struct RetrievalHit {
    const FormulaEntry* entry = nullptr;
    MatchFlags flags;
    double score = 0.0;
};

class FormulaIndex {
public:
    FormulaIndex(std::vector<FormulaEntry> entries,
                 std::map<std::string, std::vector<std::string>> synonyms);

    static FormulaIndex load(const std::string& json_path);

    // top-k by score, ties broken by entry id; zero-score entries excluded
    std::vector<RetrievalHit> retrieve(const std::string& query, int k) const;

    size_t size() const { return entries_.size(); }
    const std::vector<FormulaEntry>& entries() const { return entries_; }
    std::vector<std::string> expand_query(const std::string& query) const;

private:
    std::vector<FormulaEntry> entries_;
    std::map<std::string, std::vector<std::string>> synonyms_;
    std::map<std::string, std::vector<size_t>> keyword_index_;  // inverted keyword index
};

std::string render_hit(const RetrievalHit& hit);

}  // namespace wflow::telecom
