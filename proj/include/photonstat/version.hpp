#pragma once

namespace photonstat {

inline constexpr const char* kToolName = "photonstat";
inline constexpr const char* kToolVersion = "1.0.0";

// Version of the on-disk formats (trace CSV/RAWF32, PHSEVNT1, manifest).
inline constexpr int kFormatVersion = 1;

// Algorithm names recorded in run manifests so a run can be reproduced
// from its seed by an independent implementation.
inline constexpr const char* kRngDescription =
    "xoshiro256++ over splitmix64 stream derivation";

} // namespace photonstat
