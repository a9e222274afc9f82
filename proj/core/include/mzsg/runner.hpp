#ifndef MZSG_RUNNER_HPP
#define MZSG_RUNNER_HPP

#include <map>
#include <string>
#include <vector>

#include "mzsg/config.hpp"

namespace mzsg {

struct TaskResult {
    std::string name;
    std::string status; // "ok", "flagged" or "error"
    std::string message;
    std::map<std::string, double> headline;
    double seconds = 0.0;
};

struct RunManifest {
    std::string version;
    std::string config_echo;
    std::vector<TaskResult> tasks;
    struct Output {
        std::string path; // relative to out_dir
        std::size_t bytes = 0;
        std::string digest;
    };
    std::vector<Output> outputs;

    bool ok() const;
    std::string to_json() const;
};

/// Executes the configured tasks in declared order, writes the CSV outputs
/// and the manifest into out_dir, and records per-task status. A task error
/// is recorded and execution continues with the remaining tasks.
RunManifest run(const RunConfig& config);

} // namespace mzsg

#endif // MZSG_RUNNER_HPP
