#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// One detector channel's sampled voltage waveform. Samples are stored as
// f32 (4 bytes/sample keeps a 20.5 Mpt trace around 82 MB).

namespace photonstat {

struct AnalogTrace {
    double sample_period_s = 1e-9;
    std::string channel_label;
    std::vector<float> samples;
};

enum class TraceFormat { csv, rawf32 };

// CSV: "# photonstat-trace v1" / "sample_period_s=<float>" / "channel=<text>"
// then one voltage per line.
// RAWF32: 16-byte header (magic "PHSTRACE", u16 version=1, u16+u32 reserved),
// f64 sample_period_s, u64 sample count, then f32 samples. All little-endian.
AnalogTrace parse_trace(std::istream& in, TraceFormat format);
void write_trace(const AnalogTrace& trace, std::ostream& out,
                 TraceFormat format);

// File wrappers. load_trace sniffs the format from the leading bytes and,
// for CSV, pre-counts lines so the sample vector is allocated exactly once.
AnalogTrace load_trace(const std::filesystem::path& path);
AnalogTrace load_trace(const std::filesystem::path& path, TraceFormat format);
void save_trace(const AnalogTrace& trace, const std::filesystem::path& path,
                TraceFormat format);

} // namespace photonstat
