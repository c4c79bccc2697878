#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "json.hpp"
#include "wflow/bench.hpp"
#include "wflow/channel.hpp"
#include "wflow/dsl.hpp"
#include "wflow/mcts.hpp"
#include "wflow/mobility.hpp"
#include "wflow/prompts.hpp"
#include "wflow/telecom.hpp"
#include "wflow/tools.hpp"
#include "wflow/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wflow;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string data_dir;
    std::string backend_endpoint;  // overrides the config's endpoint
    uint64_t seed = 0;
    int jobs = 1;
};

struct RunConfig {
    // backend
    std::string endpoint;
    std::string api_key_env = "WFLOW_API_KEY";
    std::string executor_model = "executor";
    std::string optimizer_model = "optimizer";
    llm::PriceTable prices;
    llm::RetryPolicy retry;
    // search
    mcts::SearchConfig search;
    // paths
    std::string scene_path;
    std::string corpus_path;
    std::string patterns_path;
};

std::string default_data_dir() {
    if (const char* env = std::getenv("WFLOW_DATA_DIR")) return env;
    return std::string(WFLOW_SOURCE_DIR) + "/data";
}

RunConfig load_config(const GlobalOptions& global) {
    RunConfig cfg;
    std::string data_dir = global.data_dir.empty() ? default_data_dir() : global.data_dir;
    cfg.corpus_path = data_dir + "/formulas.json";
    cfg.patterns_path = data_dir + "/harmful_patterns.json";

    if (!global.config_path.empty()) {
        json doc = json::parse(read_file(global.config_path));
        if (doc.contains("backend")) {
            const json& b = doc["backend"];
            cfg.endpoint = b.value("endpoint", cfg.endpoint);
            cfg.api_key_env = b.value("api_key_env", cfg.api_key_env);
            cfg.executor_model = b.value("executor_model", cfg.executor_model);
            cfg.optimizer_model = b.value("optimizer_model", cfg.optimizer_model);
            json prices = b.value("prices", json::object());
            for (const auto& kv : prices.items())
                cfg.prices.set(kv.key(),
                               {kv.value().value("in", 0.0), kv.value().value("out", 0.0)});
            if (b.contains("retry")) {
                cfg.retry.attempts = b["retry"].value("attempts", cfg.retry.attempts);
                cfg.retry.initial_backoff =
                    std::chrono::milliseconds(b["retry"].value("initial_backoff_ms", 1000));
            }
        }
        if (doc.contains("search")) {
            const json& s = doc["search"];
            auto& sc = cfg.search;
            sc.top_k = s.value("top_k", sc.top_k);
            sc.lambda = s.value("lambda", sc.lambda);
            sc.alpha = s.value("alpha", sc.alpha);
            sc.epsilon = s.value("epsilon", sc.epsilon);
            sc.validation_runs = s.value("validation_runs", sc.validation_runs);
            sc.max_rounds = s.value("max_rounds", sc.max_rounds);
            sc.convergence_k = s.value("convergence_k", sc.convergence_k);
            sc.patience = s.value("patience", sc.patience);
            sc.z = s.value("z", sc.z);
            sc.tau_high = s.value("tau_high", sc.tau_high);
            sc.tau_mid = s.value("tau_mid", sc.tau_mid);
            sc.max_edit = s.value("max_edit", sc.max_edit);
            if (sc.top_k < 1 || sc.lambda < 0.0 || sc.lambda > 1.0 || sc.validation_runs < 1 ||
                sc.max_rounds < 1 || sc.patience < 1 || sc.epsilon <= 0.0)
                throw std::runtime_error("search config out of bounds");
        }
        if (doc.contains("paths")) {
            cfg.scene_path = doc["paths"].value("scene", cfg.scene_path);
            cfg.corpus_path = doc["paths"].value("corpus", cfg.corpus_path);
            cfg.patterns_path = doc["paths"].value("patterns", cfg.patterns_path);
        }
    }
    if (const char* env = std::getenv("WFLOW_ENDPOINT")) cfg.endpoint = env;
    if (!global.backend_endpoint.empty()) cfg.endpoint = global.backend_endpoint;
    return cfg;
}

std::vector<std::string> load_mock_script(const std::string& path) {
    json doc = json::parse(read_file(path));
    if (!doc.is_array()) throw std::runtime_error("mock script must be a JSON array of strings");
    std::vector<std::string> out;
    for (const auto& entry : doc) out.push_back(entry.get<std::string>());
    return out;
}

std::shared_ptr<llm::ChatBackend> make_backend(const RunConfig& cfg,
                                               const std::string& mock_script_path) {
    if (!mock_script_path.empty())
        return llm::scripted_mock(load_mock_script(mock_script_path));
    if (cfg.endpoint.empty())
        throw std::runtime_error(
            "no backend configured: pass --mock-script or set backend.endpoint in the config");
    llm::HttpBackendConfig http;
    http.endpoint = cfg.endpoint;
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) http.api_key = key;
    return std::make_shared<llm::HttpBackend>(http);
}

std::vector<std::shared_ptr<channel::ChannelScene>> load_scenes(
    const std::vector<std::string>& paths) {
    std::vector<std::shared_ptr<channel::ChannelScene>> scenes;
    for (const auto& p : paths)
        scenes.push_back(std::make_shared<channel::ChannelScene>(channel::ChannelScene::load(p)));
    return scenes;
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

json dataset_manifest(const std::string& benchmark, int count, uint64_t seed,
                      const std::string& scene_path, const std::string& dataset_file) {
    json manifest;
    manifest["benchmark"] = benchmark;
    manifest["count"] = count;
    manifest["seed"] = seed;
    if (!scene_path.empty()) manifest["scene"] = scene_path;
    manifest["dataset_file"] = fs::path(dataset_file).filename().string();
    manifest["content_hash"] = hex64(fnv1a64(read_file(dataset_file)));
    return manifest;
}

int cmd_generate(const GlobalOptions& global, const RunConfig& cfg,
                 const std::string& benchmark_name, const std::string& scene_path, int count,
                 const std::string& out_dir) {
    auto benchmark = bench::benchmark_from_name(benchmark_name);
    if (!benchmark) {
        std::cerr << "unknown benchmark: " << benchmark_name << "\n";
        return 1;
    }
    std::vector<bench::Problem> problems;
    std::string scene_used;
    if (*benchmark == bench::Benchmark::WCHW) {
        problems = bench::generate_wchw(count, global.seed);
    } else {
        std::string path = scene_path.empty() ? cfg.scene_path : scene_path;
        if (path.empty()) {
            std::cerr << "benchmark " << benchmark_name << " needs --scene\n";
            return 1;
        }
        channel::ChannelScene scene = channel::ChannelScene::load(path);
        scene_used = path;
        problems = *benchmark == bench::Benchmark::WCNS
                       ? bench::generate_wcns(scene, count, global.seed)
                       : bench::generate_wcmsa(scene, count, global.seed);
    }
    ensure_dir(out_dir);
    std::string dataset_file = out_dir + "/" + lowercase(benchmark_name) + ".jsonl";
    bench::write_jsonl(dataset_file, problems);
    json manifest = dataset_manifest(benchmark_name, count, global.seed, scene_used, dataset_file);
    write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << problems.size() << " problems to " << dataset_file << "\n";
    std::cout << "content hash " << manifest["content_hash"].get<std::string>() << "\n";
    return 0;
}

struct EvalSetup {
    llm::Gateway gateway;
    std::shared_ptr<llm::ChatBackend> backend;
    react::ToolRegistry registry;
    std::shared_ptr<CodeExecutor> executor;
    tools::DomainToolsConfig tool_config;
    dsl::ExecutionContext ctx;
};

void init_eval_setup(EvalSetup& setup, const RunConfig& cfg,
                     const std::vector<std::string>& scene_paths,
                     const std::string& mock_script) {
    setup.gateway.set_prices(cfg.prices);
    setup.gateway.set_retry(cfg.retry);
    setup.backend = make_backend(cfg, mock_script);
    setup.tool_config.scenes = load_scenes(scene_paths);
    if (fs::exists(cfg.corpus_path))
        setup.tool_config.formula_index =
            std::make_shared<telecom::FormulaIndex>(telecom::FormulaIndex::load(cfg.corpus_path));
    tools::register_domain_tools(setup.registry, setup.tool_config);
    setup.executor = std::make_shared<ProcessExecutor>("python3");
    setup.ctx.gateway = &setup.gateway;
    setup.ctx.backend = setup.backend.get();
    setup.ctx.tools = &setup.registry;
    setup.ctx.executor = setup.executor.get();
    setup.ctx.react_protocol = prompts::react_fixed_protocol();
}

// programs name the symbolic "executor" model by default; the config decides
// which concrete model that is
void resolve_model(dsl::WorkflowProgram& program, const RunConfig& cfg) {
    if (program.model_id == "executor") program.model_id = cfg.executor_model;
}

void print_eval_summary(const bench::EvalResult& result) {
    std::cout << strf("median score: %.4f\n", result.median_score);
    std::cout << "per-run scores:";
    for (double s : result.per_run_scores) std::cout << strf(" %.4f", s);
    std::cout << "\n";
    for (const auto& [metric, mean] : result.metric_means)
        std::cout << strf("  %-12s %.4f\n", metric.c_str(), mean);
    std::cout << strf("total cost: $%.6f\n", result.total_cost_usd);
}

json eval_report_json(const bench::EvalResult& result) {
    json report;
    report["median_score"] = result.median_score;
    report["per_run_scores"] = result.per_run_scores;
    report["total_cost_usd"] = result.total_cost_usd;
    report["metric_means"] = result.metric_means;
    json diags = json::object();
    for (const auto& d : result.diagnostics) diags[d.category] = diags.value(d.category, 0) + 1;
    report["diagnostic_counts"] = diags;
    return report;
}

void write_eval_outputs(const std::string& out_dir, const bench::EvalResult& result) {
    ensure_dir(out_dir);
    write_file(out_dir + "/report.json", eval_report_json(result).dump(2) + "\n");
    std::string log;
    for (const auto& entry : result.logs) {
        json line = {{"problem_id", entry.problem_id}, {"run", entry.run},
                     {"score", entry.score},           {"answer", entry.answer},
                     {"cost_usd", entry.cost_usd},     {"error", entry.error}};
        log += line.dump() + "\n";
    }
    write_file(out_dir + "/eval_log.jsonl", log);
}

int cmd_evaluate(const GlobalOptions& global, const RunConfig& cfg,
                 const std::string& program_path, const std::string& dataset_path,
                 const std::vector<std::string>& scene_paths, const std::string& mock_script,
                 int runs, bool oracle, const std::string& oracle_mode,
                 const std::string& out_dir) {
    std::vector<bench::Problem> problems = bench::read_jsonl(dataset_path);
    bench::EvalOptions options;
    options.runs = runs;
    options.jobs = global.jobs;
    options.base_seed = global.seed;

    bench::EvalResult result;
    if (oracle) {
        std::shared_ptr<channel::ChannelScene> scene;
        if (!scene_paths.empty())
            scene = std::make_shared<channel::ChannelScene>(
                channel::ChannelScene::load(scene_paths[0]));
        else if (!cfg.scene_path.empty())
            scene = std::make_shared<channel::ChannelScene>(
                channel::ChannelScene::load(cfg.scene_path));
        result = bench::evaluate_oracle(problems, scene.get(), oracle_mode == "kalman", options);
    } else {
        if (program_path.empty()) {
            std::cerr << "evaluate needs --program (or --oracle)\n";
            return 1;
        }
        dsl::WorkflowProgram program;
        try {
            program = dsl::parse(read_file(program_path));
        } catch (const dsl::ParseError& e) {
            std::cerr << "program parse error at " << e.diag.line << ":" << e.diag.col << ": "
                      << e.diag.message << "\n";
            return 1;
        }
        resolve_model(program, cfg);
        EvalSetup setup;
        std::vector<std::string> scenes = scene_paths;
        if (scenes.empty() && !cfg.scene_path.empty()) scenes.push_back(cfg.scene_path);
        init_eval_setup(setup, cfg, scenes, mock_script);
        result = bench::evaluate_workflow(program, problems, setup.ctx, options);
        if (!out_dir.empty()) {
            ensure_dir(out_dir);
            std::ofstream ledger(out_dir + "/ledger.csv");
            setup.gateway.ledger().write_csv(ledger);
        }
    }
    print_eval_summary(result);
    if (!out_dir.empty()) {
        write_eval_outputs(out_dir, result);
        json manifest;
        manifest["dataset"] = dataset_path;
        manifest["seed"] = global.seed;
        manifest["runs"] = runs;
        manifest["oracle"] = oracle;
        if (!program_path.empty()) manifest["program"] = program_path;
        manifest["median_score"] = result.median_score;
        write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
    }
    return 0;
}

int cmd_optimize(const GlobalOptions& global, const RunConfig& cfg,
                 const std::string& seed_program_path, const std::string& dataset_path,
                 const std::vector<std::string>& scene_paths, const std::string& mock_script,
                 const std::string& optimizer_mock_script, const std::string& task_name,
                 int rounds_override, int runs_override, const std::string& out_dir,
                 bool resume) {
    std::vector<bench::Problem> problems = bench::read_jsonl(dataset_path);
    dsl::WorkflowProgram seed_program = dsl::parse(read_file(seed_program_path));
    resolve_model(seed_program, cfg);

    EvalSetup setup;
    std::vector<std::string> scenes = scene_paths;
    if (scenes.empty() && !cfg.scene_path.empty()) scenes.push_back(cfg.scene_path);
    init_eval_setup(setup, cfg, scenes, mock_script);
    auto optimizer_backend = optimizer_mock_script.empty()
                                 ? make_backend(cfg, "")
                                 : llm::scripted_mock(load_mock_script(optimizer_mock_script));

    mcts::OptimizeConfig optimize_cfg;
    optimize_cfg.search = cfg.search;
    if (rounds_override > 0) optimize_cfg.search.max_rounds = rounds_override;
    if (runs_override > 0) optimize_cfg.search.validation_runs = runs_override;
    optimize_cfg.task_name = task_name;
    optimize_cfg.optimizer_model_id = cfg.optimizer_model;
    if (fs::exists(cfg.patterns_path))
        optimize_cfg.harmful_patterns = mcts::HarmfulPatterns::load(cfg.patterns_path);
    optimize_cfg.eval.jobs = global.jobs;

    ensure_dir(out_dir);
    ensure_dir(out_dir + "/rounds");

    mcts::ExperienceTree resume_tree;
    std::string tree_path = out_dir + "/experience.json";
    if (resume && fs::exists(tree_path))
        resume_tree = mcts::ExperienceTree::from_json(json::parse(read_file(tree_path)));

    mcts::OptimizeHooks hooks;
    hooks.on_evaluated = [&](int round, const bench::EvalResult& eval,
                             const mcts::CriticReport* critic) {
        std::string dir = out_dir + strf("/rounds/round_%03d", round);
        ensure_dir(dir);
        write_eval_outputs(dir, eval);
        if (critic) write_file(dir + "/critic.txt", critic->render());
    };
    hooks.on_round = [&](int round, const mcts::ExperienceTree& tree,
                         const mcts::ConvergenceTracker& tracker) {
        // persist after every round so interrupted searches resume
        write_file(tree_path, tree.to_json().dump(2) + "\n");
        if (const mcts::SearchNode* node = tree.find(round)) {
            std::string dir = out_dir + strf("/rounds/round_%03d", round);
            ensure_dir(dir);
            write_file(dir + "/program.wf", dsl::serialize(node->program));
            json scores = {{"round", round},
                           {"median_score", node->median_score},
                           {"per_run_scores", node->per_run_scores},
                           {"parent_round", node->parent_round},
                           {"modification", node->modification}};
            write_file(dir + "/scores.json", scores.dump(2) + "\n");
        }
        std::string conv = "round,mean_topk,sigma,delta,sigma_delta,no_improvement,streak\n";
        for (const auto& e : tracker.history())
            conv += strf("%d,%.6f,%.6f,%.6f,%.6f,%d,%d\n", e.round, e.mean_topk, e.sigma, e.delta,
                         e.sigma_delta, e.no_improvement ? 1 : 0, e.streak);
        write_file(out_dir + "/convergence.csv", conv);
    };

    mcts::OptimizeResult result =
        mcts::optimize(seed_program, problems, setup.ctx, *optimizer_backend, optimize_cfg,
                       global.seed, std::move(resume_tree), hooks);

    std::string trace = "round,median_score,best_so_far\n";
    double best = 0.0;
    for (const auto& [round, node] : result.tree.nodes()) {
        best = std::max(best, node.median_score);
        trace += strf("%d,%.6f,%.6f\n", round, node.median_score, best);
    }
    write_file(out_dir + "/score_vs_round.csv", trace);

    {
        std::ofstream ledger(out_dir + "/costs.csv");
        setup.gateway.ledger().write_csv(ledger);
    }

    const mcts::SearchNode* best_node = result.tree.find(result.best_round);
    if (best_node) write_file(out_dir + "/best_program.wf", dsl::serialize(best_node->program));

    json manifest;
    manifest["seed"] = global.seed;
    manifest["rounds_run"] = result.rounds.size();
    manifest["best_round"] = result.best_round;
    manifest["best_score"] = best_node ? best_node->median_score : 0.0;
    manifest["converged_early"] = result.converged_early;
    manifest["total_cost_usd"] = setup.gateway.ledger().total();
    write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");

    std::cout << strf("best round: %d (median %.4f)%s\n", result.best_round,
                      best_node ? best_node->median_score : 0.0,
                      result.converged_early ? ", converged early" : "");
    std::cout << strf("total cost: $%.6f\n", setup.gateway.ledger().total());
    return 0;
}

int cmd_score(const std::string& dataset_path, const std::string& answers_path,
              const std::string& out_dir) {
    std::vector<bench::Problem> problems = bench::read_jsonl(dataset_path);
    std::map<std::string, std::string> answers;
    for (const auto& line : split(read_file(answers_path), '\n')) {
        std::string t = trim(line);
        if (t.empty()) continue;
        json doc = json::parse(t);
        answers[doc.at("id").get<std::string>()] = doc.at("answer").get<std::string>();
    }
    double total = 0.0;
    json lines = json::array();
    for (const auto& problem : problems) {
        auto it = answers.find(problem.id);
        bench::ScoreReport report =
            bench::score_problem(problem, it == answers.end() ? "" : it->second);
        total += report.overall;
        json entry = report.to_json();
        entry["problem_id"] = problem.id;
        lines.push_back(entry);
    }
    double mean = problems.empty() ? 0.0 : total / static_cast<double>(problems.size());
    std::cout << strf("mean score over %zu problems: %.4f\n", problems.size(), mean);
    if (!out_dir.empty()) {
        ensure_dir(out_dir);
        write_file(out_dir + "/score_report.json",
                   json{{"mean_score", mean}, {"problems", lines}}.dump(2) + "\n");
    }
    return 0;
}

// remaining args as --key value pairs
telecom::CalcArgs parse_calc_args(const std::vector<std::string>& rest) {
    telecom::CalcArgs args;
    for (size_t i = 0; i + 1 < rest.size(); i += 2) {
        std::string key = rest[i];
        if (starts_with(key, "--")) key = key.substr(2);
        std::replace(key.begin(), key.end(), '-', '_');
        args[key] = std::stod(rest[i + 1]);
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workflow search over wireless-network benchmark tasks"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--config", global.config_path, "run configuration JSON");
    app.add_option("--data-dir", global.data_dir, "data directory (formulas, prompts, patterns)");
    app.add_option("--backend", global.backend_endpoint, "chat-completions endpoint override");
    app.add_option("--seed", global.seed, "random seed");
    app.add_option("--jobs", global.jobs, "evaluation worker threads");

    auto* generate = app.add_subcommand("generate", "generate a benchmark dataset");
    std::string gen_benchmark, gen_scene, gen_out = "out";
    int gen_count = 250;
    generate->add_option("--benchmark", gen_benchmark, "wchw | wcns | wcmsa")->required();
    generate->add_option("--scene", gen_scene, "scene JSON (wcns/wcmsa)");
    generate->add_option("--count", gen_count, "number of problems");
    generate->add_option("--out", gen_out, "output directory");

    auto* evaluate = app.add_subcommand("evaluate", "evaluate a workflow program on a dataset");
    std::string eval_program, eval_dataset, eval_mock, eval_out, eval_oracle_mode = "truth";
    std::vector<std::string> eval_scenes;
    int eval_runs = 5;
    bool eval_oracle = false;
    evaluate->add_option("--program", eval_program, "workflow program file");
    evaluate->add_option("--dataset", eval_dataset, "dataset JSONL")->required();
    evaluate->add_option("--scene", eval_scenes, "scene JSON (repeatable)");
    evaluate->add_option("--mock-script", eval_mock, "scripted backend replies (JSON array)");
    evaluate->add_option("--runs", eval_runs, "validation runs");
    evaluate->add_flag("--oracle", eval_oracle, "use the deterministic solver instead");
    evaluate->add_option("--oracle-mode", eval_oracle_mode, "truth | kalman");
    evaluate->add_option("--out", eval_out, "output directory");

    auto* optimize = app.add_subcommand("optimize", "search for a better workflow");
    std::string opt_seed_program, opt_dataset, opt_mock, opt_optimizer_mock,
        opt_out = "out/search";
    std::string opt_task = "wireless";
    std::vector<std::string> opt_scenes;
    int opt_rounds = 0, opt_runs = 0;
    bool opt_resume = false;
    optimize->add_option("--seed-program", opt_seed_program, "seed workflow file")->required();
    optimize->add_option("--dataset", opt_dataset, "validation dataset JSONL")->required();
    optimize->add_option("--scene", opt_scenes, "scene JSON (repeatable)");
    optimize->add_option("--mock-script", opt_mock, "executor mock script");
    optimize->add_option("--optimizer-mock-script", opt_optimizer_mock, "optimizer mock script");
    optimize->add_option("--task", opt_task, "task name used in optimizer prompts");
    optimize->add_option("--rounds", opt_rounds, "max mutation rounds (overrides config)");
    optimize->add_option("--runs", opt_runs, "validation runs per evaluation");
    optimize->add_option("--out", opt_out, "results directory");
    optimize->add_flag("--resume", opt_resume, "resume from a persisted experience tree");

    auto* score = app.add_subcommand("score", "score an answers file against a dataset");
    std::string score_dataset, score_answers, score_out;
    score->add_option("--dataset", score_dataset, "dataset JSONL")->required();
    score->add_option("--answers", score_answers, "answers JSONL with id/answer fields")
        ->required();
    score->add_option("--out", score_out, "output directory");

    auto* tools_cmd = app.add_subcommand("tools", "invoke a registered tool directly");
    auto* calc = tools_cmd->add_subcommand("calc", "precision calculator");
    std::string calc_op;
    calc->add_option("operation", calc_op, "operation name, or 'list'")->required();
    calc->allow_extras();

    auto* cqi = tools_cmd->add_subcommand("cqi", "SNR to CQI mapping");
    double cqi_snr = 0.0;
    cqi->add_option("--snr", cqi_snr, "SNR in dB")->required();

    auto* retrieve = tools_cmd->add_subcommand("retrieve", "formula retrieval");
    std::string retrieve_query;
    int retrieve_k = 3;
    retrieve->add_option("query", retrieve_query, "query text")->required();
    retrieve->add_option("--k", retrieve_k, "results to return");

    auto* raytrace = tools_cmd->add_subcommand("raytrace", "link estimate at a position");
    std::string rt_scene;
    double rt_x = 0.0, rt_y = 0.0;
    raytrace->add_option("--scene", rt_scene, "scene JSON")->required();
    raytrace->add_option("--x", rt_x)->required();
    raytrace->add_option("--y", rt_y)->required();

    auto* kalman = tools_cmd->add_subcommand("kalman", "trajectory prediction");
    std::string kalman_traj;
    kalman->add_option("--trajectory", kalman_traj, "positions as x,y;x,y;...")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = load_config(global);

        if (generate->parsed())
            return cmd_generate(global, cfg, gen_benchmark, gen_scene, gen_count, gen_out);
        if (evaluate->parsed())
            return cmd_evaluate(global, cfg, eval_program, eval_dataset, eval_scenes, eval_mock,
                                eval_runs, eval_oracle, eval_oracle_mode, eval_out);
        if (optimize->parsed())
            return cmd_optimize(global, cfg, opt_seed_program, opt_dataset, opt_scenes, opt_mock,
                                opt_optimizer_mock, opt_task, opt_rounds, opt_runs, opt_out,
                                opt_resume);
        if (score->parsed()) return cmd_score(score_dataset, score_answers, score_out);

        if (tools_cmd->parsed()) {
            if (calc->parsed()) {
                if (calc_op == "list") {
                    for (const auto& op : telecom::calc_operations()) {
                        std::cout << op.name << "(";
                        for (size_t i = 0; i < op.args.size(); ++i)
                            std::cout << (i ? ", " : "") << op.args[i];
                        std::cout << "): " << op.description << "\n";
                    }
                    return 0;
                }
                double value = telecom::calc(calc_op, parse_calc_args(calc->remaining()));
                std::cout << strf("%.10g\n", value);
                return 0;
            }
            if (cqi->parsed()) {
                int v = channel::snr_to_cqi(cqi_snr);
                std::cout << strf("CQI %d (eta %.2f bps/Hz)\n", v, channel::cqi_to_eta(v));
                return 0;
            }
            if (retrieve->parsed()) {
                auto index = telecom::FormulaIndex::load(cfg.corpus_path);
                auto hits = index.retrieve(retrieve_query, retrieve_k);
                if (hits.empty()) std::cout << "no matching formulas\n";
                for (const auto& hit : hits) std::cout << telecom::render_hit(hit);
                return 0;
            }
            if (raytrace->parsed()) {
                channel::ChannelScene scene = channel::ChannelScene::load(rt_scene);
                channel::LinkEstimate link = channel::estimate_link(scene, {rt_x, rt_y});
                std::cout << strf("LOS: %s\npath loss: %.2f dB\nSNR: %.2f dB\nCQI: %d\neta: "
                                  "%.2f bps/Hz\n",
                                  link.los ? "yes" : "no", link.path_loss_db, link.snr_db,
                                  link.cqi, link.eta);
                return 0;
            }
            if (kalman->parsed()) {
                mobility::Trajectory traj;
                for (const auto& pair : split(kalman_traj, ';')) {
                    auto xy = split(trim(pair), ',');
                    if (xy.size() != 2) throw std::runtime_error("bad trajectory format");
                    traj.positions.push_back({std::stod(xy[0]), std::stod(xy[1])});
                }
                Point2 next = mobility::kalman_predict(traj);
                std::cout << strf("predicted next position: (%.2f, %.2f)\n", next.x, next.y);
                return 0;
            }
            std::cerr << "tools: choose calc | cqi | retrieve | raytrace | kalman\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
