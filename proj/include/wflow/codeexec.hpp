#pragma once

#include <chrono>
#include <deque>
#include <mutex>
#include <string>

namespace wflow {

// Runs generated code snippets; pluggable so tests can script outcomes.
class CodeExecutor {
public:
    struct Result {
        int exit_code = 0;
        bool timed_out = false;
        std::string output;  // stdout and stderr, merged
        bool ok() const { return exit_code == 0 && !timed_out; }
    };
    virtual ~CodeExecutor() = default;
    virtual Result run(const std::string& code) = 0;
};

// Shells out to an interpreter command with a hard timeout; the snippet runs
// from a fresh temp directory and network access is dropped when permitted.
class ProcessExecutor : public CodeExecutor {
public:
    explicit ProcessExecutor(std::string interpreter = "python3",
                             std::chrono::seconds timeout = std::chrono::seconds(30));
    Result run(const std::string& code) override;

private:
    std::string interpreter_;
    std::chrono::seconds timeout_;
};

// Scripted executor for tests: pops queued results in order.
class ScriptedExecutor : public CodeExecutor {
public:
    void push(Result r);
    Result run(const std::string& code) override;
    int runs() const { return runs_; }
    const std::string& last_code() const { return last_code_; }

private:
    std::mutex mu_;
    std::deque<Result> queue_;
    int runs_ = 0;
    std::string last_code_;
};

}  // namespace wflow
