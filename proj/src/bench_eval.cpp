#include <algorithm>
#include <atomic>
#include <thread>

#include "wflow/bench.hpp"
#include "wflow/util.hpp"

namespace wflow::bench {

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

struct Cell {
    double score = 0.0;
    double cost = 0.0;
    std::string answer;
    std::string error;
    std::vector<Diag> diagnostics;
    std::map<std::string, double> sub_scores;
};

class MetricAverager {
public:
    void add(const std::map<std::string, double>& sub_scores) {
        for (const auto& [name, score] : sub_scores) {
            sums_[name] += score;
            ++counts_[name];
        }
    }
    void add(const ScoreReport& report) {
        std::map<std::string, double> flat;
        for (const auto& [name, s] : report.sub_scores) flat[name] = s.score;
        add(flat);
    }
    std::map<std::string, double> means() const {
        std::map<std::string, double> out;
        for (const auto& [name, sum] : sums_) out[name] = sum / counts_.at(name);
        return out;
    }

private:
    std::map<std::string, double> sums_;
    std::map<std::string, long> counts_;
};

}  // namespace

EvalResult evaluate_workflow(const dsl::WorkflowProgram& program,
                             const std::vector<Problem>& problems, dsl::ExecutionContext& ctx,
                             const EvalOptions& options) {
    EvalResult result;
    if (problems.empty() || options.runs < 1) return result;
    MetricAverager averager;

    size_t n = problems.size();
    for (int run = 0; run < options.runs; ++run) {
        std::vector<Cell> cells(n);
        auto work = [&](size_t index) {
            Cell& cell = cells[index];
            dsl::ExecutionContext local = ctx;
            local.seed = Rng::mix(options.base_seed,
                                  static_cast<uint64_t>(run) * 1000003ull + index);
            try {
                dsl::ExecutionResult exec = dsl::execute(program, problems[index].question, local);
                cell.answer = exec.answer;
                cell.cost = exec.trace.total_cost();
                ScoreReport report = score_problem(problems[index], exec.answer);
                cell.score = report.overall;
                cell.diagnostics = report.diagnostics;
                for (const auto& [name, s] : report.sub_scores) cell.sub_scores[name] = s.score;
            } catch (const std::exception& e) {
                cell.score = 0.0;
                cell.error = e.what();
            }
        };

        if (options.jobs > 1) {
            std::atomic<size_t> cursor{0};
            std::vector<std::thread> workers;
            int count = std::min<int>(options.jobs, static_cast<int>(n));
            for (int w = 0; w < count; ++w)
                workers.emplace_back([&] {
                    for (size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) work(i);
                });
            for (auto& t : workers) t.join();
        } else {
            for (size_t i = 0; i < n; ++i) work(i);
        }

        double run_total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const Cell& cell = cells[i];
            run_total += cell.score;
            result.total_cost_usd += cell.cost;
            result.logs.push_back(
                {problems[i].id, run, cell.score, cell.answer, cell.cost, cell.error});
            result.diagnostics.insert(result.diagnostics.end(), cell.diagnostics.begin(),
                                      cell.diagnostics.end());
            averager.add(cell.sub_scores);
        }
        result.per_run_scores.push_back(run_total / static_cast<double>(n));
    }
    result.median_score = median(result.per_run_scores);
    result.metric_means = averager.means();
    return result;
}

EvalResult evaluate_oracle(const std::vector<Problem>& problems,
                           const channel::ChannelScene* scene, bool use_kalman,
                           const EvalOptions& options) {
    EvalResult result;
    if (problems.empty() || options.runs < 1) return result;
    MetricAverager averager;
    for (int run = 0; run < options.runs; ++run) {
        double run_total = 0.0;
        for (const auto& problem : problems) {
            RunLogEntry entry;
            entry.problem_id = problem.id;
            entry.run = run;
            try {
                entry.answer = rule_based_oracle(problem, scene, use_kalman);
                ScoreReport report = score_problem(problem, entry.answer);
                entry.score = report.overall;
                result.diagnostics.insert(result.diagnostics.end(), report.diagnostics.begin(),
                                          report.diagnostics.end());
                averager.add(report);
            } catch (const std::exception& e) {
                entry.score = 0.0;
                entry.error = e.what();
            }
            run_total += entry.score;
            result.logs.push_back(std::move(entry));
        }
        result.per_run_scores.push_back(run_total / static_cast<double>(problems.size()));
    }
    result.median_score = median(result.per_run_scores);
    result.metric_means = averager.means();
    return result;
}

}  // namespace wflow::bench
