#pragma once

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace dztp::testing {

struct CommandResult {
    int exit_code = -1;
    std::string out;
};

// Runs a shell command, capturing stdout. stderr is left to the caller's
// redirections inside cmd.
inline CommandResult run_command(const std::string& cmd) {
    CommandResult r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        return r;
    }
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        r.out.append(buf.data(), n);
    }
    const int status = ::pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

inline std::string cli(const std::string& args) { return std::string(DZTP_CLI_PATH) + " " + args; }

}  // namespace dztp::testing
