#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "relay/errors.hpp"
#include "relay/schedule.hpp"
#include "relay/timing.hpp"

namespace relay {

// A runnable algorithm. The runner computes an output for a task and is
// expected to poll the cancellation flag so abandonment can take effect;
// an uncooperative runner is detached and simply stops being charged.
struct CandidateAlgorithm {
    std::string id;
    std::function<std::string(const std::string& task,
                              const std::atomic<bool>& cancelled)>
        runner;
};

struct StageTiming {
    std::string id;
    double budget = 0.0;    // seconds; infinity on the final stage
    double measured = 0.0;  // wall seconds the stage occupied the run
    bool completed = false;
    bool expired = false;
};

struct RunRecord {
    std::string task;
    std::string completing_id;
    std::size_t completing_index = 0;  // 1-based stage number
    double wall_elapsed = 0.0;         // measured end-to-end wall time
    double model_elapsed = 0.0;        // abandoned stages charged their budgets
    std::vector<StageTiming> stages;
    std::string output;
};

// A stage crashed; the record holds everything observed up to the failure.
class stage_failure : public std::runtime_error {
  public:
    stage_failure(const std::string& what, RunRecord partial)
        : std::runtime_error(what), partial_record(std::move(partial)) {}

    RunRecord partial_record;
};

struct ExecutorConfig {
    double profile_cap = 1000.0;  // seconds a profiled run may take
    int poll_interval_ms = 5;     // cooperative runners should poll this often
};

namespace detail {

struct StageState {
    std::mutex m;
    std::condition_variable cv;
    bool done = false;
    bool failed = false;
    bool rejected = false;  // runner refused the task outright
    std::string result;
    std::string error;
    std::atomic<bool> cancelled{false};
};

// Launches the runner on its own thread; the thread owns a reference to the
// shared state so an abandoned stage can finish (or not) without anyone
// waiting on it.
inline std::shared_ptr<StageState> launch_stage(const CandidateAlgorithm& alg,
                                                const std::string& task) {
    auto state = std::make_shared<StageState>();
    std::thread([state, runner = alg.runner, task] {
        std::string result, error;
        bool failed = false, rejected = false;
        try {
            result = runner(task, state->cancelled);
        } catch (const contract_error& e) {
            failed = rejected = true;
            error = e.what();
        } catch (const std::exception& e) {
            failed = true;
            error = e.what();
        } catch (...) {
            failed = true;
            error = "unknown failure";
        }
        {
            std::lock_guard<std::mutex> lock(state->m);
            state->done = true;
            state->failed = failed;
            state->rejected = rejected;
            state->result = std::move(result);
            state->error = std::move(error);
        }
        state->cv.notify_all();
    }).detach();
    return state;
}

inline double seconds_between(std::chrono::steady_clock::time_point a,
                              std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

}  // namespace detail

// Runs the portfolio under the derived-algorithm policy: stage i gets until
// its cumulative deadline, computed from the start of the run, then is
// cancelled; the final stage runs unbounded. The model clock charges an
// abandoned stage exactly its budget and the completing stage its measured
// time, so it tracks the quantity the theory prices.
inline RunRecord run_derived(const std::vector<CandidateAlgorithm>& portfolio,
                             const Schedule& schedule, const std::string& task) {
    if (portfolio.empty())
        throw contract_error("run_derived: portfolio is empty");
    if (schedule.budgets.size() + 1 != portfolio.size())
        throw contract_error(
            "run_derived: schedule has " + std::to_string(schedule.budgets.size()) +
            " budgets but the portfolio needs " +
            std::to_string(portfolio.size() - 1));
    validate(schedule);
    for (const auto& alg : portfolio)
        if (!alg.runner)
            throw contract_error("run_derived: candidate '" + alg.id +
                                 "' has no runner");

    using clock = std::chrono::steady_clock;
    const auto run_start = clock::now();
    RunRecord record;
    record.task = task;

    std::chrono::duration<double> cumulative{0.0};
    for (std::size_t i = 0; i < portfolio.size(); ++i) {
        const bool last = i + 1 == portfolio.size();
        const auto stage_start = clock::now();
        auto state = detail::launch_stage(portfolio[i], task);

        bool finished;
        if (last) {
            std::unique_lock<std::mutex> lock(state->m);
            state->cv.wait(lock, [&] { return state->done; });
            finished = true;
        } else {
            cumulative += std::chrono::duration<double>(schedule.budgets[i]);
            const auto deadline =
                run_start + std::chrono::duration_cast<clock::duration>(cumulative);
            std::unique_lock<std::mutex> lock(state->m);
            finished =
                state->cv.wait_until(lock, deadline, [&] { return state->done; });
        }

        StageTiming timing;
        timing.id = portfolio[i].id;
        timing.budget = last ? std::numeric_limits<double>::infinity()
                             : schedule.budgets[i];
        timing.measured = detail::seconds_between(stage_start, clock::now());

        if (finished) {
            std::lock_guard<std::mutex> lock(state->m);
            if (state->failed) {
                timing.completed = false;
                record.stages.push_back(timing);
                record.wall_elapsed =
                    detail::seconds_between(run_start, clock::now());
                const std::string what = "stage " + std::to_string(i + 1) +
                                         " (" + portfolio[i].id +
                                         ") failed: " + state->error;
                if (state->rejected) throw contract_error(what);
                throw stage_failure(what, record);
            }
            timing.completed = true;
            record.stages.push_back(timing);
            record.completing_id = portfolio[i].id;
            record.completing_index = i + 1;
            record.model_elapsed += timing.measured;
            record.output = state->result;
            record.wall_elapsed = detail::seconds_between(run_start, clock::now());
            return record;
        }

        state->cancelled.store(true);
        timing.expired = true;
        record.stages.push_back(timing);
        record.model_elapsed += schedule.budgets[i];
    }
    throw std::logic_error("run_derived: unbounded final stage cannot expire");
}

// ------------------------------------------------------------------ profile

struct ProfileResult {
    TimingSamples samples;  // filled for two-candidate portfolios: (t1, t2)
    std::vector<std::string> task_ids;               // tasks that were kept
    std::vector<std::vector<double>> times;          // per kept task, per candidate
    std::vector<std::string> warnings;               // excluded tasks, with reasons
};

// Runs every candidate to completion on every task, sequentially and in task
// order, recording elapsed seconds. A crash or a run past the safety cap
// drops the whole task (all coordinates of the joint sample are needed) and
// leaves a warning instead.
inline ProfileResult profile(const std::vector<CandidateAlgorithm>& portfolio,
                             const std::vector<std::string>& tasks,
                             const ExecutorConfig& cfg = {}) {
    if (portfolio.empty())
        throw contract_error("profile: portfolio is empty");
    if (!(cfg.profile_cap > 0.0))
        throw contract_error("profile: safety cap must be positive");
    using clock = std::chrono::steady_clock;
    ProfileResult out;
    for (const auto& task : tasks) {
        std::vector<double> row;
        std::string problem;
        for (const auto& alg : portfolio) {
            const auto start = clock::now();
            auto state = detail::launch_stage(alg, task);
            const auto deadline =
                start + std::chrono::duration_cast<clock::duration>(
                            std::chrono::duration<double>(cfg.profile_cap));
            bool finished;
            {
                std::unique_lock<std::mutex> lock(state->m);
                finished = state->cv.wait_until(lock, deadline,
                                                [&] { return state->done; });
            }
            if (!finished) {
                state->cancelled.store(true);
                problem = "candidate '" + alg.id + "' exceeded the " +
                          std::to_string(cfg.profile_cap) + "s safety cap";
                break;
            }
            {
                std::lock_guard<std::mutex> lock(state->m);
                if (state->failed) {
                    problem = "candidate '" + alg.id + "' failed: " + state->error;
                    break;
                }
            }
            double elapsed = detail::seconds_between(start, clock::now());
            if (elapsed <= 0.0) elapsed = 1e-9;  // sub-tick runner, keep it positive
            row.push_back(elapsed);
        }
        if (!problem.empty()) {
            out.warnings.push_back("task '" + task + "' excluded: " + problem);
            continue;
        }
        out.task_ids.push_back(task);
        out.times.push_back(row);
        if (portfolio.size() == 2)
            out.samples.pairs.emplace_back(row[0], row[1]);
    }
    return out;
}

// --------------------------------------------------------------- equivalence

struct Mismatch {
    std::string task;
    std::string first_id, second_id;
    std::string first_output, second_output;
};

struct MismatchReport {
    std::vector<Mismatch> mismatches;

    bool equivalent() const { return mismatches.empty(); }
};

// Spot check that the candidates really compute the same function: every
// candidate runs to completion on every task and outputs are compared
// against the first candidate's.
inline MismatchReport verify_equivalence(
    const std::vector<CandidateAlgorithm>& portfolio,
    const std::vector<std::string>& tasks) {
    if (portfolio.empty())
        throw contract_error("verify_equivalence: portfolio is empty");
    MismatchReport report;
    std::atomic<bool> never_cancelled{false};
    for (const auto& task : tasks) {
        const std::string reference = portfolio.front().runner(task, never_cancelled);
        for (std::size_t j = 1; j < portfolio.size(); ++j) {
            const std::string output = portfolio[j].runner(task, never_cancelled);
            if (output != reference)
                report.mismatches.push_back({task, portfolio.front().id,
                                             portfolio[j].id, reference, output});
        }
    }
    return report;
}

}  // namespace relay
