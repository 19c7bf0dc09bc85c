#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "relay/errors.hpp"
#include "relay/executor.hpp"

namespace relay {

namespace detail {

inline std::string substitute_task(const std::string& templ,
                                   const std::string& task) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t hit = templ.find("{task}", pos);
        if (hit == std::string::npos) {
            out.append(templ, pos, std::string::npos);
            return out;
        }
        out.append(templ, pos, hit - pos);
        out += task;
        pos = hit + 6;
    }
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string last_line(const std::string& s) {
    const std::string t = trim(s);
    const auto nl = t.find_last_of('\n');
    return nl == std::string::npos ? t : trim(t.substr(nl + 1));
}

}  // namespace detail

enum class OutputParse { trimmed, last_line };

inline OutputParse parse_rule_from_name(const std::string& name) {
    if (name == "trimmed") return OutputParse::trimmed;
    if (name == "last_line") return OutputParse::last_line;
    throw contract_error("unknown output parse rule '" + name +
                         "' (expected trimmed or last_line)");
}

// Wraps an external command as a candidate. Each "{task}" in an argument is
// replaced by the task string. Cancellation sends SIGTERM, waits briefly,
// then SIGKILLs; the wrapper never leaves the child running after it gives up.
inline CandidateAlgorithm command_candidate(const std::string& id,
                                            std::vector<std::string> argv_template,
                                            OutputParse parse = OutputParse::trimmed) {
    if (argv_template.empty())
        throw contract_error("command candidate '" + id + "' has an empty command");
    return {id, [id, argv_template = std::move(argv_template), parse](
                    const std::string& task, const std::atomic<bool>& cancelled) {
                std::vector<std::string> argv;
                argv.reserve(argv_template.size());
                for (const auto& a : argv_template)
                    argv.push_back(detail::substitute_task(a, task));

                int fds[2];
                if (pipe(fds) != 0)
                    throw std::runtime_error("pipe failed: " +
                                             std::string(std::strerror(errno)));
                const pid_t pid = fork();
                if (pid < 0) {
                    close(fds[0]);
                    close(fds[1]);
                    throw std::runtime_error("fork failed: " +
                                             std::string(std::strerror(errno)));
                }
                if (pid == 0) {
                    close(fds[0]);
                    dup2(fds[1], STDOUT_FILENO);
                    close(fds[1]);
                    std::vector<char*> cargv;
                    cargv.reserve(argv.size() + 1);
                    for (auto& a : argv) cargv.push_back(a.data());
                    cargv.push_back(nullptr);
                    execvp(cargv[0], cargv.data());
                    _exit(127);
                }

                close(fds[1]);
                std::string captured;
                char buf[4096];
                bool killed = false;
                pollfd pfd{fds[0], POLLIN, 0};
                while (true) {
                    if (!killed && cancelled.load()) {
                        kill(pid, SIGTERM);
                        std::this_thread::sleep_for(std::chrono::milliseconds(100));
                        kill(pid, SIGKILL);
                        killed = true;
                    }
                    const int ready = poll(&pfd, 1, 20);
                    if (ready < 0) {
                        if (errno == EINTR) continue;
                        break;
                    }
                    if (ready == 0) continue;
                    const ssize_t got = read(fds[0], buf, sizeof buf);
                    if (got < 0) {
                        if (errno == EINTR) continue;
                        break;
                    }
                    if (got == 0) break;  // child closed its end
                    captured.append(buf, std::size_t(got));
                }
                close(fds[0]);
                int status = 0;
                waitpid(pid, &status, 0);

                if (killed) throw std::runtime_error("command '" + id + "' cancelled");
                if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
                    const std::string why =
                        WIFSIGNALED(status)
                            ? "signal " + std::to_string(WTERMSIG(status))
                            : "exit code " + std::to_string(WEXITSTATUS(status));
                    throw std::runtime_error("command '" + id + "' failed (" + why +
                                             ")");
                }
                return parse == OutputParse::trimmed ? detail::trim(captured)
                                                     : detail::last_line(captured);
            }};
}

}  // namespace relay
