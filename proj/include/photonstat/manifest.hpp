#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "photonstat/sim.hpp"

// Run manifest: everything needed to audit or re-run a pipeline step.
// Input digests are FNV-1a 64 over the raw file bytes; re-verification
// detects any silent change to the inputs of a recorded run.

namespace photonstat {

struct FileDigest {
    std::string path;
    std::uint64_t fnv1a64 = 0;
};

struct RunManifest {
    std::string command_line;
    int format_version = 0;
    std::string tool;
    std::string rng; // generator + splitting scheme, for reproducibility
    std::vector<FileDigest> inputs;
    std::vector<FileDigest> outputs;
    std::optional<SimConfig> sim_config;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

std::uint64_t fnv1a64_file(const std::filesystem::path& path);

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

// Recomputes every recorded digest (inputs and outputs); returns the paths
// that are missing or changed.
std::vector<std::string> verify_manifest(const RunManifest& manifest);

} // namespace photonstat
