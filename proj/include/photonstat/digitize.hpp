#pragma once

#include <cstdint>

#include "photonstat/event_series.hpp"
#include "photonstat/trace.hpp"

// Pulse-onset detection: convert an analog waveform into the binary event
// series, one 1-bit at each rising edge. The default discriminator is a
// Schmitt trigger (TTL-compatible 1.5 V / 0.5 V pair); a plain single
// threshold is available as an option.

namespace photonstat {

enum class ThresholdMode { hysteresis, single };

struct DigitizeOptions {
    ThresholdMode mode = ThresholdMode::hysteresis;
    double threshold_high_v = 1.5;
    // Re-arm level for hysteresis; ignored in single-threshold mode.
    double threshold_low_v = 0.5;
};

// Emits 1 at the first sample at/above threshold_high after the trigger is
// armed. Hysteresis re-arms when the signal falls below threshold_low;
// single mode re-arms below threshold_high. The trigger starts armed, so a
// trace that opens already above threshold yields an onset at sample 0.
// Output resolution = sample period, length preserved.
//
// threads > 1 splits the trace into chunks scanned in parallel; the chunk
// boundaries hand off the trigger arming state, so the result is
// bit-identical to the sequential scan.
EventSeries digitize(const AnalogTrace& trace, const DigitizeOptions& options,
                     unsigned threads = 1);

// Non-paralyzable (non-extending) dead time: scanning left to right, a
// 1-bit survives only if at least ceil(dead_time/resolution) slots have
// elapsed since the previous surviving 1-bit. Idempotent.
EventSeries apply_dead_time(const EventSeries& series, double dead_time_s);

// Smallest slot separation enforced by a dead time, guarding the quotient
// against one-ulp noise in nominally integer ratios like 22 ns / 1 ns.
std::uint64_t dead_time_slots(double dead_time_s, double resolution_s);

} // namespace photonstat
