#pragma once

#include <stdexcept>
#include <string>

namespace photonstat {

// Exit code contract used by the CLI (stable for scripting).
enum ExitCode : int {
    kExitOk = 0,
    kExitArgError = 2,   // bad arguments / invalid config
    kExitDataError = 3,  // malformed files, bad samples, I/O failures
    kExitStatsError = 4, // calibration or statistics failures
};

// Invalid arguments, preconditions, configuration.
struct ArgumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed file structure (bad magic, bad header, truncation) and I/O failures.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structurally valid input carrying unusable values (non-finite samples etc).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Calibration cannot succeed, degenerate statistics.
struct StatsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e)) return kExitArgError;
    if (dynamic_cast<const FormatError*>(&e)) return kExitDataError;
    if (dynamic_cast<const DataError*>(&e)) return kExitDataError;
    if (dynamic_cast<const StatsError*>(&e)) return kExitStatsError;
    return kExitDataError;
}

} // namespace photonstat
