#include "photonstat/digitize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>
#include <vector>

#include "photonstat/errors.hpp"

namespace photonstat {

namespace {

void validate_options(const DigitizeOptions& opt) {
    if (!std::isfinite(opt.threshold_high_v))
        throw ArgumentError("digitize: threshold_high must be finite");
    if (opt.mode == ThresholdMode::hysteresis) {
        if (!std::isfinite(opt.threshold_low_v))
            throw ArgumentError("digitize: threshold_low must be finite");
        if (!(opt.threshold_low_v < opt.threshold_high_v))
            throw ArgumentError(
                "digitize: threshold_low must be strictly below threshold_high");
    }
}

// One Schmitt step. armed = waiting for a rising edge.
inline bool step(bool armed, float v, const DigitizeOptions& opt,
                 bool& onset) {
    onset = false;
    if (armed) {
        if (v >= opt.threshold_high_v) {
            onset = true;
            return false;
        }
        return true;
    }
    const double rearm = opt.mode == ThresholdMode::hysteresis
                             ? opt.threshold_low_v
                             : opt.threshold_high_v;
    return v < rearm;
}

// Scan [first, last) from a known arming state, setting onset bits.
bool scan_chunk(const AnalogTrace& trace, std::size_t first, std::size_t last,
                bool armed, const DigitizeOptions& opt, EventSeries& out) {
    bool onset = false;
    for (std::size_t i = first; i < last; ++i) {
        armed = step(armed, trace.samples[i], opt, onset);
        if (onset) out.set(i);
    }
    return armed;
}

// Arming state after [first, last) for both possible entry states.
std::pair<bool, bool> chunk_transfer(const AnalogTrace& trace,
                                     std::size_t first, std::size_t last,
                                     const DigitizeOptions& opt) {
    bool from_armed = true, from_disarmed = false;
    bool onset = false;
    for (std::size_t i = first; i < last; ++i) {
        const float v = trace.samples[i];
        from_armed = step(from_armed, v, opt, onset);
        from_disarmed = step(from_disarmed, v, opt, onset);
    }
    return {from_armed, from_disarmed};
}

} // namespace

EventSeries digitize(const AnalogTrace& trace, const DigitizeOptions& options,
                     unsigned threads) {
    validate_options(options);
    if (trace.samples.empty())
        throw ArgumentError("digitize: trace has no samples");
    if (!(trace.sample_period_s > 0.0) || !std::isfinite(trace.sample_period_s))
        throw ArgumentError("digitize: sample period must be positive");

    const std::size_t n = trace.samples.size();
    EventSeries out(trace.sample_period_s, n);

    constexpr std::size_t kMinChunk = 1 << 16;
    if (threads <= 1 || n < 2 * kMinChunk) {
        scan_chunk(trace, 0, n, true, options, out);
        return out;
    }

    // Chunk boundaries on 64-slot multiples so the emission pass writes
    // word-disjoint regions.
    const std::size_t chunk_count =
        std::min<std::size_t>(threads, (n + kMinChunk - 1) / kMinChunk);
    std::vector<std::size_t> bounds(chunk_count + 1, 0);
    for (std::size_t c = 1; c < chunk_count; ++c)
        bounds[c] = ((n * c / chunk_count) / 64) * 64;
    bounds[chunk_count] = n;

    // Pass 1 (parallel): per-chunk arming-state transfer functions.
    std::vector<std::pair<bool, bool>> transfer(chunk_count);
    {
        std::vector<std::thread> pool;
        for (std::size_t c = 0; c < chunk_count; ++c)
            pool.emplace_back([&, c] {
                transfer[c] =
                    chunk_transfer(trace, bounds[c], bounds[c + 1], options);
            });
        for (auto& t : pool) t.join();
    }
    // Sequential fold: entry state of every chunk.
    std::vector<bool> entry(chunk_count);
    bool armed = true;
    for (std::size_t c = 0; c < chunk_count; ++c) {
        entry[c] = armed;
        armed = armed ? transfer[c].first : transfer[c].second;
    }
    // Pass 2 (parallel): emit onsets from the exact entry states.
    {
        std::vector<std::thread> pool;
        for (std::size_t c = 0; c < chunk_count; ++c)
            pool.emplace_back([&, c] {
                scan_chunk(trace, bounds[c], bounds[c + 1], entry[c], options,
                           out);
            });
        for (auto& t : pool) t.join();
    }
    return out;
}

std::uint64_t dead_time_slots(double dead_time_s, double resolution_s) {
    if (!(dead_time_s >= 0.0) || !std::isfinite(dead_time_s))
        throw ArgumentError("dead time must be finite and >= 0");
    if (dead_time_s == 0.0) return 0;
    const double ratio = dead_time_s / resolution_s;
    if (ratio >= 9.2e18) // beyond any representable slot span
        return UINT64_MAX;
    // ceil with a relative guard: 22e-9 / 1e-9 can land one ulp off 22.
    return static_cast<std::uint64_t>(std::ceil(ratio * (1.0 - 1e-12)));
}

EventSeries apply_dead_time(const EventSeries& series, double dead_time_s) {
    const std::uint64_t window =
        dead_time_slots(dead_time_s, series.resolution_s());
    EventSeries out(series.resolution_s(), series.slot_count(),
                    series.origin_s());
    if (window <= 1) {
        std::copy(series.words().begin(), series.words().end(),
                  out.mutable_words().begin());
        return out;
    }
    bool any_kept = false;
    std::uint64_t last_kept = 0;
    const auto words = series.words();
    for (std::uint64_t w = 0; w < words.size(); ++w) {
        std::uint64_t bits = words[w];
        while (bits) {
            const std::uint64_t slot =
                w * 64 + static_cast<std::uint64_t>(std::countr_zero(bits));
            bits &= bits - 1;
            if (!any_kept || slot - last_kept >= window) {
                out.set(slot);
                last_kept = slot;
                any_kept = true;
            }
        }
    }
    return out;
}

} // namespace photonstat
