#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <memory>

#include "doctest.h"
#include "wflow/dsl.hpp"
#include "wflow/react.hpp"
#include "wflow/tools.hpp"
#include "wflow/util.hpp"

using namespace wflow;
using namespace wflow::dsl;

namespace {

struct Harness {
    llm::Gateway gateway;
    std::shared_ptr<llm::ChatBackend> backend;
    ScriptedExecutor executor;
    react::ToolRegistry registry;
    std::shared_ptr<channel::ChannelScene> scene;
    ExecutionContext ctx;

    explicit Harness(std::vector<std::string> script,
                     llm::ExhaustMode mode = llm::ExhaustMode::RepeatLast) {
        llm::PriceTable prices;
        prices.set("executor", {1.0, 2.0});
        gateway.set_prices(prices);
        llm::RetryPolicy retry;
        retry.initial_backoff = std::chrono::milliseconds(1);
        gateway.set_retry(retry);
        backend = llm::scripted_mock(std::move(script), mode);
        scene = std::make_shared<channel::ChannelScene>();
        scene->region = "open";
        scene->tx = {0.0, 0.0, 1.5};
        tools::DomainToolsConfig config;
        config.scenes = {scene};
        tools::register_domain_tools(registry, config);
        ctx.gateway = &gateway;
        ctx.backend = backend.get();
        ctx.tools = &registry;
        ctx.executor = &executor;
    }
};

const char* kTwoStage = R"(prompt SOLVE = "Solve it."
prompt CHECK = "Check it."
draft = custom(input=problem, prompt=SOLVE)
final = custom(input=draft, prompt=CHECK)
answer final
)";

}  // namespace

TEST_CASE("single statement program parses into one node with a slot reference") {
    WorkflowProgram p = parse("prompt SOLVE = \"go\"\na = custom(input=problem, prompt=SOLVE)\n");
    REQUIRE(p.nodes.size() == 1);
    CHECK(p.nodes[0].id == "a");
    CHECK(p.nodes[0].op == OperatorKind::Custom);
    CHECK(p.prompt_slots.at("SOLVE") == "go");
    CHECK(p.nodes[0].args.at("prompt").kind == ArgValue::Kind::SlotName);
    CHECK(p.terminal()->id == "a");
}

TEST_CASE("serialize-parse canonicalization is idempotent") {
    for (const std::string source : {
             std::string(kTwoStage),
             std::string("prompt P = \"\"\"multi\nline\"\"\"\n"
                         "x = custom(input=problem, prompt=P)\n"
                         "e = sc_ensemble(solutions=[x, x], question=problem)\n"),
             std::string("prompt S = \"s\"\n"
                         "t = tool_agent(input=problem, strategy=S, max_steps=3)\n"
                         "r = review(problem=problem, solution=t)\n"
                         "v = revise(problem=problem, solution=t, feedback=r.feedback) if "
                         "r.verdict == \"false\"\n"),
         }) {
        std::string once = serialize(parse(source));
        std::string twice = serialize(parse(once));
        CHECK(once == twice);
    }
}

TEST_CASE("parse errors carry line positions and name the defect") {
    // graph too large
    std::string big = "prompt P = \"x\"\n";
    for (int i = 0; i < 11; ++i)
        big += strf("s%d = custom(input=problem, prompt=P)\n", i);
    CHECK_THROWS_WITH_AS(parse(big), doctest::Contains("graph too large"), ParseError);

    CHECK_THROWS_WITH_AS(parse("a = warp(input=problem)\n"),
                         doctest::Contains("unknown operator"), ParseError);
    CHECK_THROWS_WITH_AS(parse("prompt P = \"x\"\na = custom(input=b, prompt=P)\n"),
                         doctest::Contains("not an earlier statement"), ParseError);
    // forward references are dangling too
    CHECK_THROWS_WITH_AS(
        parse("prompt P = \"x\"\na = custom(input=z, prompt=P)\nz = custom(input=problem, "
              "prompt=P)\n"),
        doctest::Contains("not an earlier statement"), ParseError);
    CHECK_THROWS_WITH_AS(parse("prompt P = \"x\"\na = custom(input=problem, prompt=MISSING)\n"),
                         doctest::Contains("unknown prompt slot"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse("prompt P = \"x\"\na = custom(input=problem, prompt=P)\na = custom(input=problem, "
              "prompt=P)\n"),
        doctest::Contains("duplicate statement id"), ParseError);
    // placeholders are rejected at parse time
    CHECK_THROWS_WITH_AS(parse("prompt P = \"fill {slot} here\"\n"),
                         doctest::Contains("placeholder"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse("prompt P = \"x\"\nt = tool_agent(input=problem, strategy=P, max_steps=0)\n"),
        doctest::Contains("positive integer"), ParseError);
    CHECK_THROWS_WITH_AS(
        parse("prompt P = \"x\"\nt = tool_agent(input=problem, strategy=P, max_steps=2.5)\n"),
        doctest::Contains("positive integer"), ParseError);
    try {
        parse("prompt P = \"x\"\n???\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.diag.line == 2);
    }
}

TEST_CASE("json form round-trips the program") {
    WorkflowProgram p = parse(kTwoStage);
    p.meta.round = 3;
    p.meta.parent_round = 1;
    WorkflowProgram q = program_from_json(program_to_json(p));
    CHECK(serialize(p) == serialize(q));
    CHECK(q.meta.round == 3);
    CHECK(q.meta.parent_round == 1);
    CHECK(program_to_json(p) == program_to_json(q));
}

TEST_CASE("property: random programs survive canonicalization and json round trips") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        WorkflowProgram p;
        int slots = static_cast<int>(rng.uniform_int(1, 3));
        for (int s = 0; s < slots; ++s)
            p.prompt_slots[strf("P%d", s)] = strf("instruction %d", s);
        int nodes = static_cast<int>(rng.uniform_int(1, 6));
        for (int n = 0; n < nodes; ++n) {
            Statement stmt;
            stmt.id = strf("n%d", n);
            ArgValue input = n == 0 || rng.bernoulli(0.4)
                                 ? ArgValue::problem()
                                 : ArgValue::ref(strf("n%d", rng.uniform_int(0, n - 1)));
            switch (rng.uniform_int(0, 3)) {
                case 0:
                    stmt.op = OperatorKind::Custom;
                    stmt.args["input"] = input;
                    stmt.args["prompt"] =
                        ArgValue::slot(strf("P%d", rng.uniform_int(0, slots - 1)));
                    break;
                case 1:
                    stmt.op = OperatorKind::AnswerGenerate;
                    stmt.args["input"] = input;
                    break;
                case 2:
                    stmt.op = OperatorKind::Format;
                    stmt.args["input"] = input;
                    break;
                default:
                    stmt.op = OperatorKind::CodeLevel;
                    stmt.args["tool"] = ArgValue::string("ray_tracing");
                    stmt.args["input"] = input;
                    break;
            }
            if (n > 0 && rng.bernoulli(0.25)) {
                Condition cond;
                cond.kind = Condition::Kind::Present;
                cond.ref_id = strf("n%d", rng.uniform_int(0, n - 1));
                stmt.condition = cond;
            }
            p.nodes.push_back(stmt);
        }
        std::string text = serialize(p);
        WorkflowProgram reparsed = parse(text);
        CHECK(serialize(reparsed) == text);
        CHECK(serialize(program_from_json(program_to_json(reparsed))) == text);
    }
}

TEST_CASE("statement diff counts insertions, deletions, edits, and slot changes") {
    WorkflowProgram base = parse(kTwoStage);
    CHECK(statement_diff(base, base) == 0);

    WorkflowProgram plus_one = parse(
        "prompt SOLVE = \"Solve it.\"\nprompt CHECK = \"Check it.\"\n"
        "draft = custom(input=problem, prompt=SOLVE)\n"
        "extra = answer_generate(input=draft)\n"
        "final = custom(input=extra, prompt=CHECK)\nanswer final\n");
    CHECK(statement_diff(base, plus_one) == 2);  // one insertion, one edited statement

    WorkflowProgram slot_edit = base;
    slot_edit.prompt_slots["SOLVE"] = "Solve it carefully.";
    CHECK(statement_diff(base, slot_edit) == 1);  // slot text edits count once

    WorkflowProgram empty;
    CHECK(statement_diff(base, empty) == 2 + 2);  // two deletions, two slot removals
}

TEST_CASE("execute: single custom with a scripted reply") {
    Harness h({"X"});
    WorkflowProgram p = parse("prompt S = \"solve\"\na = custom(input=problem, prompt=S)\n");
    ExecutionResult r = execute(p, "the problem", h.ctx);
    CHECK(r.answer == "X");
    REQUIRE(r.trace.records.size() == 1);
    CHECK(r.trace.records[0].cost_usd > 0.0);
    CHECK(r.trace.total_cost() == doctest::Approx(r.trace.records[0].cost_usd));
}

TEST_CASE("failed statement is recorded and the answer falls back") {
    Harness h({"first output"});
    // second statement names a tool that is not registered
    WorkflowProgram p = parse(
        "prompt S = \"solve\"\n"
        "a = custom(input=problem, prompt=S)\n"
        "b = code_level(tool=no_such_tool, input=a)\n");
    ExecutionResult r = execute(p, "q", h.ctx);
    REQUIRE(r.trace.records.size() == 2);
    CHECK(!r.trace.records[0].error);
    REQUIRE(r.trace.records[1].error);
    CHECK(r.answer == "first output");

    // replaying the recorded trace reproduces the same fallback choice
    const StatementRecord* last_good = nullptr;
    for (const auto& rec : r.trace.records)
        if (!rec.error && !rec.skipped && !rec.output.empty()) last_good = &rec;
    REQUIRE(last_good != nullptr);
    CHECK(last_good->output == r.answer);
}

TEST_CASE("downstream dependents of a failed statement are skipped") {
    Harness h({"draft"});
    WorkflowProgram p = parse(
        "prompt S = \"solve\"\n"
        "a = custom(input=problem, prompt=S)\n"
        "b = code_level(tool=no_such_tool, input=a)\n"
        "c = format(input=b)\n");
    ExecutionResult r = execute(p, "q", h.ctx);
    REQUIRE(r.trace.records.size() == 3);
    CHECK(r.trace.records[2].skipped);
    CHECK(r.answer == "draft");
}

TEST_CASE("cost additivity and scripted determinism") {
    auto run = [] {
        Harness h({"one", "two", "three"});
        WorkflowProgram p = parse(
            "prompt S = \"s\"\n"
            "a = custom(input=problem, prompt=S)\n"
            "b = custom(input=a, prompt=S)\n"
            "c = custom(input=b, prompt=S)\n");
        return execute(p, "q", h.ctx);
    };
    ExecutionResult r1 = run();
    double sum = 0.0;
    for (const auto& rec : r1.trace.records) sum += rec.cost_usd;
    CHECK(r1.trace.total_cost() == sum);  // exact
    ExecutionResult r2 = run();
    CHECK(r1.answer == r2.answer);
    CHECK(r1.trace.total_cost() == r2.trace.total_cost());
    for (size_t i = 0; i < r1.trace.records.size(); ++i)
        CHECK(r1.trace.records[i].output == r2.trace.records[i].output);
}

TEST_CASE("code_level statements add zero backend cost") {
    Harness h({"decision"});
    WorkflowProgram p = parse(
        "prompt S = \"s\"\n"
        "cqi = code_level(tool=ray_tracing, input=problem)\n"
        "sol = custom(input=cqi, prompt=S)\n");
    ExecutionResult r = execute(p, "user at Position: (30.0, 40.0)", h.ctx);
    REQUIRE(r.trace.records.size() == 2);
    CHECK(r.trace.records[0].cost_usd == 0.0);
    CHECK(r.trace.records[0].output.find("ACCURATE CQI FROM RAY TRACING") != std::string::npos);
    CHECK(r.trace.records[1].cost_usd > 0.0);
}

TEST_CASE("conditions gate execution on prior outputs") {
    // review says false -> revise runs
    Harness h1({"draft", "False, the sign is wrong", "revised"});
    WorkflowProgram p = parse(
        "prompt S = \"s\"\n"
        "a = custom(input=problem, prompt=S)\n"
        "r = review(problem=problem, solution=a)\n"
        "v = revise(problem=problem, solution=a, feedback=r.feedback) if r.verdict == \"false\"\n");
    ExecutionResult r1 = execute(p, "q", h1.ctx);
    CHECK(r1.answer == "revised");

    // review says true -> revise skipped, answer falls back to last output
    Harness h2({"draft", "True, looks right"});
    ExecutionResult r2 = execute(p, "q", h2.ctx);
    REQUIRE(r2.trace.records.size() == 3);
    CHECK(r2.trace.records[2].skipped);
    CHECK(r2.answer == "True, looks right");
}

// --- operator primitives ---------------------------------------------------------

TEST_CASE("op_custom sends the prompt alone when the input is empty") {
    class Capture : public llm::ChatBackend {
    public:
        llm::BackendReply complete(const llm::ChatRequest& r) override {
            last = r.messages.back().text;
            return {"ok", 1, 1};
        }
        std::string name() const override { return "capture"; }
        std::string last;
    };
    Capture capture;
    llm::Gateway gateway;
    ExecutionContext ctx;
    ctx.gateway = &gateway;
    ctx.backend = &capture;
    op_custom("", "the instruction", ctx);
    CHECK(capture.last == "the instruction");
    op_custom("payload", "the instruction", ctx);
    CHECK(capture.last == "the instruction\n\npayload");
}

TEST_CASE("sc_ensemble: singleton, letter pick, invalid letter fallback") {
    Harness h({"B"});
    OpOutput single = op_sc_ensemble({"only"}, "q", h.ctx);
    CHECK(single.text == "only");
    CHECK(single.cost_usd == 0.0);

    OpOutput picked = op_sc_ensemble({"s1", "s2", "s3"}, "q", h.ctx);
    CHECK(picked.text == "s2");

    Harness h2({"Z"});
    OpOutput fallback = op_sc_ensemble({"s1", "s2", "s3"}, "q", h2.ctx);
    CHECK(fallback.text == "s1");
    CHECK(!fallback.warnings.empty());
}

TEST_CASE("md_ensemble majority voting under an identity shuffle") {
    auto identity = [](int n, int) {
        std::vector<int> order(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
        return order;
    };

    Harness all_a({"A", "A", "A", "A", "A"});
    CHECK(op_md_ensemble({"s1", "s2", "s3"}, "q", all_a.ctx, identity).text == "s1");

    Harness mixed({"A", "A", "B", "B", "A"});
    CHECK(op_md_ensemble({"s1", "s2", "s3"}, "q", mixed.ctx, identity).text == "s1");

    // 2-2-1 split: tie between s1 and s2 resolves to the earliest index
    Harness split({"A", "B", "A", "B", "C"});
    CHECK(op_md_ensemble({"s1", "s2", "s3"}, "q", split.ctx, identity).text == "s1");
}

TEST_CASE("code_level tools inject results or pass through on extraction miss") {
    Harness h({"unused"});
    OpOutput hit = op_code_level("ray_tracing", "user Position: (30.0, 40.0), Region: open",
                                 h.ctx);
    CHECK(hit.text.find("ACCURATE CQI FROM RAY TRACING:") != std::string::npos);
    CHECK(hit.warnings.empty());

    OpOutput miss = op_code_level("ray_tracing", "no coordinates here", h.ctx);
    CHECK(miss.text == "no coordinates here");
    REQUIRE(!miss.warnings.empty());

    OpOutput kalman = op_code_level(
        "kalman_predictor",
        "Historical positions: (79.3, 46.0) -> (80.1, 45.4) -> (81.2, 44.7) -> (82.1, 44.1)",
        h.ctx);
    auto pos = tools::extract_query_position(kalman.text);
    REQUIRE(pos.has_value());
    CHECK(std::hypot(pos->x - 83.0, pos->y - 43.5) < 0.5);
}

TEST_CASE("programmer: success, retry after failure, three-strike budget") {
    Harness ok({"```python\nprint(2+2)\n```"});
    ok.executor.push({0, false, "4\n"});
    OpOutput out = op_programmer("what is 2+2", "", ok.ctx);
    CHECK(out.text == "4");
    CHECK(out.fields.at("code") == "print(2+2)");
    CHECK(ok.executor.runs() == 1);

    Harness retry({"```python\nloop()\n```", "```python\nprint(1)\n```"});
    retry.executor.push({-1, true, "execution timed out"});
    retry.executor.push({0, false, "1\n"});
    OpOutput second = op_programmer("p", "", retry.ctx);
    CHECK(second.text == "1");
    CHECK(retry.executor.runs() == 2);
    CHECK(!second.warnings.empty());

    Harness fails({"```python\nbad\n```"});
    for (int i = 0; i < 3; ++i) fails.executor.push({1, false, "SyntaxError"});
    OpOutput failed = op_programmer("p", "", fails.ctx);
    CHECK(fails.executor.runs() == 3);  // exactly three executions
    CHECK(failed.text.find("all attempts failed") == 0);
}

TEST_CASE("test operator loops until the cases pass") {
    Harness h({"```python\nfixed_once\n```", "```python\nfixed_twice\n```"});
    h.executor.push({1, false, "case 1 failed"});
    h.executor.push({1, false, "case 1 failed again"});
    h.executor.push({0, false, "all passed"});
    OpOutput out = op_test("p", "solution_v1", "assert f(1) == 2", h.ctx);
    CHECK(h.executor.runs() == 3);  // fail, fail, pass
    CHECK(out.fields.at("passed") == "true");
    CHECK(out.text == "fixed_twice");
}

TEST_CASE("review and answer_generate parse their tagged outputs") {
    Harness yes({"True. The reasoning holds."});
    OpOutput review = op_review("p", "s", yes.ctx);
    CHECK(review.fields.at("verdict") == "true");
    CHECK(review.fields.at("feedback").find("reasoning holds") != std::string::npos);

    Harness tagged({"<thought>t</thought><answer>a</answer>"});
    OpOutput gen = op_answer_generate("q", tagged.ctx);
    CHECK(gen.fields.at("thought") == "t");
    CHECK(gen.fields.at("answer") == "a");
    CHECK(gen.text == "a");

    Harness untagged({"no tags at all"});
    OpOutput raw = op_answer_generate("q", untagged.ctx);
    CHECK(raw.text == "no tags at all");
    CHECK(!raw.warnings.empty());
}

TEST_CASE("real process executor runs snippets and enforces the timeout") {
    ProcessExecutor python("python3", std::chrono::seconds(30));
    CodeExecutor::Result r = python.run("print(2+2)");
    if (r.exit_code == 127) return;  // interpreter unavailable in this environment
    CHECK(r.ok());
    CHECK(trim(r.output) == "4");

    ProcessExecutor strict("python3", std::chrono::seconds(1));
    CodeExecutor::Result hang = strict.run("while True:\n    pass\n");
    CHECK(hang.timed_out);
}

TEST_CASE("execution contains failures for arbitrary valid programs") {
    // random programs over flaky backends and tools must never escape execute()
    Rng rng(777);
    std::vector<std::string> slot_names = {"P0", "P1"};
    for (int trial = 0; trial < 40; ++trial) {
        WorkflowProgram p;
        for (const auto& name : slot_names) p.prompt_slots[name] = "instr " + name;
        int nodes = static_cast<int>(rng.uniform_int(1, 8));
        for (int n = 0; n < nodes; ++n) {
            Statement stmt;
            stmt.id = strf("n%d", n);
            ArgValue input = n == 0 || rng.bernoulli(0.5)
                                 ? ArgValue::problem()
                                 : ArgValue::ref(strf("n%d", rng.uniform_int(0, n - 1)));
            switch (rng.uniform_int(0, 5)) {
                case 0:
                    stmt.op = OperatorKind::Custom;
                    stmt.args["input"] = input;
                    stmt.args["prompt"] = ArgValue::slot(slot_names[0]);
                    break;
                case 1:
                    stmt.op = OperatorKind::CodeLevel;
                    // half the time an unregistered tool: must fail in-trace
                    stmt.args["tool"] = ArgValue::string(rng.bernoulli(0.5) ? "ray_tracing"
                                                                            : "missing_tool");
                    stmt.args["input"] = input;
                    break;
                case 2:
                    stmt.op = OperatorKind::Review;
                    stmt.args["problem"] = ArgValue::problem();
                    stmt.args["solution"] = input;
                    break;
                case 3:
                    stmt.op = OperatorKind::ScEnsemble;
                    stmt.args["solutions"] = ArgValue::list({input, ArgValue::problem()});
                    stmt.args["question"] = ArgValue::problem();
                    break;
                case 4:
                    stmt.op = OperatorKind::AnswerGenerate;
                    stmt.args["input"] = input;
                    break;
                default:
                    stmt.op = OperatorKind::Format;
                    stmt.args["input"] = input;
                    break;
            }
            if (n > 0 && rng.bernoulli(0.3))
                stmt.condition = Condition{Condition::Kind::Present,
                                           strf("n%d", rng.uniform_int(0, n - 1)), "", ""};
            p.nodes.push_back(stmt);
        }
        // a backend that runs dry partway through stresses the error paths
        Harness h({"alpha", "true", "B"},
                  rng.bernoulli(0.5) ? llm::ExhaustMode::Error : llm::ExhaustMode::RepeatLast);
        WorkflowProgram reparsed = parse(serialize(p));
        ExecutionResult r = execute(reparsed, "fuzz Position: (40.0, 9.0)", h.ctx);
        CHECK(r.trace.records.size() == reparsed.nodes.size());
        double sum = 0.0;
        for (const auto& rec : r.trace.records) sum += rec.cost_usd;
        CHECK(r.trace.total_cost() == sum);
    }
}

TEST_CASE("program fixed parameters flow into the backend requests") {
    class Capture : public llm::ChatBackend {
    public:
        llm::BackendReply complete(const llm::ChatRequest& r) override {
            model = r.model_id;
            temperature = r.temperature;
            return {"ok", 1, 1};
        }
        std::string name() const override { return "capture"; }
        std::string model;
        double temperature = -1.0;
    };
    Capture capture;
    llm::Gateway gateway;
    ExecutionContext ctx;
    ctx.gateway = &gateway;
    ctx.backend = &capture;

    WorkflowProgram p = parse(
        "model \"fast-model\"\ntemperature 0.5\nprompt S = \"s\"\n"
        "a = custom(input=problem, prompt=S)\n");
    CHECK(p.model_id == "fast-model");
    CHECK(p.temperature == 0.5);
    CHECK(serialize(parse(serialize(p))) == serialize(p));
    execute(p, "q", ctx);
    CHECK(capture.model == "fast-model");
    CHECK(capture.temperature == 0.5);
}

TEST_CASE("slicing-shaped program reproduces the worked slicing answer") {
    // executor mock replies with the worked answer once the accurate CQI is injected
    Harness h({"Slice Type: eMBB, CQI: 8, Bandwidth: 6.92 MHz, Throughput: 13.2 Mbps"});
    WorkflowProgram p = parse(
        "prompt SOLVE = \"decide the slice\"\n"
        "cqi = code_level(tool=ray_tracing, input=problem)\n"
        "sol = custom(input=cqi, prompt=SOLVE)\n"
        "answer sol\n");
    std::string question =
        "Network State: eMBB Slice: 12 active users (90 MHz capacity); URLLC Slice: 3 active "
        "users (30 MHz capacity).\nRegion: open\nNew User Position: (120.00, 35.00)\nService "
        "Request: \"I want to browse websites and check email\"";
    ExecutionResult r = execute(p, question, h.ctx);
    CHECK(r.answer.find("6.92 MHz") != std::string::npos);
    CHECK(r.answer.find("13.2 Mbps") != std::string::npos);
    CHECK(r.trace.records[0].output.find("ACCURATE CQI FROM RAY TRACING") != std::string::npos);
}
