#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace glhnn::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kIo = 2,
    kValidation = 3,
    kNumeric = 4,
};

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

// Maps a library exception to the process exit code.
int exit_code_for(const std::exception& e) noexcept;

// Runs one command line (argv[0] is the program name). Regular output goes to
// `out`, diagnostics to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// Re-executes the command recorded in a manifest with the options stored
// there. Timestamps are the only manifest fields that differ between runs.
int replay(const nlohmann::json& manifest, std::ostream& out, std::ostream& err);

}  // namespace glhnn::cli
