#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace subprocess {

struct Result {
    int exit_code = -1;
    std::string output;  // stdout only
};

/// Runs a shell command, captures stdout, and returns the exit code.
inline Result run(const std::string& command) {
    Result result;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return result;
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        result.output.append(buffer.data(), n);
    }
    int status = pclose(pipe);
    if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
    return result;
}

}  // namespace subprocess
