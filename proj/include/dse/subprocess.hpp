#pragma once

#include <string>

namespace dse {

struct ProcessResult
{
    int exit_code = -1;
    bool timed_out = false;
    std::string out;
    std::string err;
};

/// Runs `command` through /bin/sh -c in `working_dir` (empty = current),
/// feeding `input` on stdin and collecting stdout and stderr. The child is
/// killed after timeout_seconds.
ProcessResult run_process(const std::string& command, const std::string& working_dir, const std::string& input,
                          double timeout_seconds);

}  // namespace dse
