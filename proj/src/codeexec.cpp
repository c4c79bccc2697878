#include "wflow/codeexec.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <stdexcept>

#include "wflow/util.hpp"

namespace wflow {

ProcessExecutor::ProcessExecutor(std::string interpreter, std::chrono::seconds timeout)
    : interpreter_(std::move(interpreter)), timeout_(timeout) {}

CodeExecutor::Result ProcessExecutor::run(const std::string& code) {
    namespace fs = std::filesystem;
    char tmpl[] = "/tmp/wflow_exec_XXXXXX";
    char* dir = mkdtemp(tmpl);
    if (!dir) throw std::runtime_error("mkdtemp failed");
    std::string workdir = dir;
    std::string script = workdir + "/snippet";
    write_file(script, code);

    int pipefd[2];
    if (pipe(pipefd) != 0) throw std::runtime_error("pipe failed");

    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork failed");
    if (pid == 0) {
        // child
        if (chdir(workdir.c_str()) != 0) _exit(126);
        unshare(CLONE_NEWNET);  // best effort; ignored without privilege
        dup2(pipefd[1], STDOUT_FILENO);
        dup2(pipefd[1], STDERR_FILENO);
        close(pipefd[0]);
        close(pipefd[1]);
        setpgid(0, 0);
        execlp(interpreter_.c_str(), interpreter_.c_str(), "snippet", nullptr);
        _exit(127);
    }
    close(pipefd[1]);
    setpgid(pid, pid);

    Result result;
    auto deadline = std::chrono::steady_clock::now() + timeout_;
    char buf[4096];
    bool open = true;
    while (open) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
        }
        struct pollfd pfd = {pipefd[0], POLLIN, 0};
        int rc = poll(&pfd, 1, result.timed_out ? 100 : static_cast<int>(
                                    std::min<long long>(remaining.count(), 200)));
        if (rc > 0 && (pfd.revents & (POLLIN | POLLHUP))) {
            ssize_t n = read(pipefd[0], buf, sizeof(buf));
            if (n > 0)
                result.output.append(buf, static_cast<size_t>(n));
            else
                open = false;
        } else if (rc == 0 && result.timed_out) {
            open = false;
        }
    }
    close(pipefd[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (result.timed_out)
        result.exit_code = -1;
    else if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else
        result.exit_code = -WTERMSIG(status);

    std::error_code ec;
    fs::remove_all(workdir, ec);
    if (result.timed_out && result.output.empty()) result.output = "execution timed out";
    return result;
}

void ScriptedExecutor::push(Result r) {
    std::lock_guard<std::mutex> lock(mu_);
    queue_.push_back(std::move(r));
}

CodeExecutor::Result ScriptedExecutor::run(const std::string& code) {
    std::lock_guard<std::mutex> lock(mu_);
    ++runs_;
    last_code_ = code;
    if (queue_.empty()) return {0, false, "(scripted executor: empty queue)"};
    Result r = queue_.front();
    queue_.pop_front();
    return r;
}

}  // namespace wflow
