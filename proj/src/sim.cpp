#include "photonstat/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "photonstat/digitize.hpp"
#include "photonstat/errors.hpp"
#include "photonstat/rng.hpp"

namespace photonstat {

namespace {

// Run fn(index) for index in [0, count) on up to `threads` workers. The
// work is index-addressed and every index is independent, so the schedule
// cannot affect the result.
template <typename Fn>
void parallel_indices(std::uint64_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> cursor{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const unsigned workers =
        static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t i =
                    cursor.fetch_add(1, std::memory_order_relaxed);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::scoped_lock lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Scatter a homogeneous Poisson process of the given rate onto the series,
// keeping each event with probability keep_prob. Time is cut into chunks
// sized so the per-chunk mean stays ~4, each chunk drawing from its own
// derived stream; placement and keep decisions always consume one uniform
// each, so thinning runs on common random numbers.
void scatter_poisson(EventSeries& series, double rate_hz, double keep_prob,
                     std::uint64_t seed, std::uint64_t tag, unsigned threads) {
    if (rate_hz == 0.0 || keep_prob == 0.0) return;
    const std::uint64_t slots = series.slot_count();
    if (slots == 0) return;
    const double per_slot = rate_hz * series.resolution_s();
    if (per_slot > 64.0)
        throw ArgumentError(
            "simulate: rate exceeds 64 expected events per slot");
    const std::uint64_t chunk_slots = std::min<std::uint64_t>(
        slots, std::max<std::uint64_t>(
                   1, static_cast<std::uint64_t>(std::ceil(4.0 / per_slot))));
    const std::uint64_t chunks = (slots + chunk_slots - 1) / chunk_slots;

    parallel_indices(chunks, threads, [&](std::uint64_t c) {
        const std::uint64_t first = c * chunk_slots;
        const std::uint64_t last = std::min(slots, first + chunk_slots);
        auto rng = make_stream(seed, tag, c);
        const std::uint64_t n = sample_poisson(
            rng, per_slot * static_cast<double>(last - first));
        for (std::uint64_t e = 0; e < n; ++e) {
            const double u_pos = rng.uniform01();
            const double u_keep = rng.uniform01();
            if (u_keep < keep_prob) {
                const std::uint64_t slot =
                    first + static_cast<std::uint64_t>(
                                u_pos * static_cast<double>(last - first));
                series.set_atomic(std::min(slot, last - 1));
            }
        }
    });
}

void check_saturation(double detections_per_slot,
                      std::vector<std::string>* warnings) {
    if (detections_per_slot > 1.0 && warnings)
        warnings->push_back(
            "expected detections per slot exceed 1; the detector model "
            "saturates and counts will clip");
}

} // namespace

std::uint64_t SimConfig::slot_count() const {
    return static_cast<std::uint64_t>(std::llround(duration_s / resolution_s));
}

double SimConfig::heralding_scale() const {
    if (oam_heralding_scale > 0.0) return oam_heralding_scale;
    return 1.0 / (1.0 + static_cast<double>(pump_oam_order));
}

double SimConfig::pairs_per_mode() const {
    if (mean_pairs_per_mode >= 0.0) return mean_pairs_per_mode;
    if (pair_rate_hz >= 0.0) return pair_rate_hz * mode_time_s;
    return 0.0;
}

void SimConfig::validate() const {
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
        throw ArgumentError("config: duration_s must be positive");
    if (!(resolution_s > 0.0) || !std::isfinite(resolution_s))
        throw ArgumentError("config: resolution_s must be positive");
    if (slot_count() == 0)
        throw ArgumentError("config: duration shorter than one slot");
    if (!(photon_rate_hz >= 0.0))
        throw ArgumentError("config: photon_rate_hz must be >= 0");
    if (!(dark_rate_hz >= 0.0))
        throw ArgumentError("config: dark_rate_hz must be >= 0");
    if (!(dead_time_s >= 0.0))
        throw ArgumentError("config: dead_time_s must be >= 0");
    if (!(efficiency_signal >= 0.0 && efficiency_signal <= 1.0))
        throw ArgumentError("config: efficiency_signal must be in [0,1]");
    if (!(efficiency_idler >= 0.0 && efficiency_idler <= 1.0))
        throw ArgumentError("config: efficiency_idler must be in [0,1]");
    if (kind == SourceKind::spdc_pair) {
        if (mean_pairs_per_mode >= 0.0 && pair_rate_hz >= 0.0)
            throw ArgumentError(
                "config: give mean_pairs_per_mode or pair_rate_hz, not both");
        if (!(mode_time_s >= resolution_s))
            throw ArgumentError("config: mode_time_s must be >= resolution_s");
        if (!(pairs_per_mode() >= 0.0) || !std::isfinite(pairs_per_mode()))
            throw ArgumentError("config: pair occupancy must be >= 0");
    }
    if (oam_heralding_scale > 0.0) {
        if (oam_heralding_scale > 1.0)
            throw ArgumentError("config: oam_heralding_scale must be in (0,1]");
        if (pump_oam_order == 0 && oam_heralding_scale != 1.0)
            throw ArgumentError(
                "config: heralding scale at order 0 must stay 1");
    } else if (oam_heralding_scale == 0.0) {
        throw ArgumentError("config: oam_heralding_scale must be in (0,1]");
    }
    if (!(pulse_width_s > 0.0) || !std::isfinite(pulse_amplitude_v))
        throw ArgumentError("config: bad pulse shape parameters");
}

EventSeries gen_coherent(const SimConfig& cfg,
                         std::vector<std::string>* warnings, unsigned threads) {
    cfg.validate();
    if (cfg.kind != SourceKind::coherent)
        throw ArgumentError("gen_coherent: config kind is not coherent");
    check_saturation(
        (cfg.photon_rate_hz * cfg.efficiency_signal + cfg.dark_rate_hz) *
            cfg.resolution_s,
        warnings);

    EventSeries series(cfg.resolution_s, cfg.slot_count());
    scatter_poisson(series, cfg.photon_rate_hz, cfg.efficiency_signal,
                    cfg.rng_seed, kStreamCoherent, threads);
    scatter_poisson(series, cfg.dark_rate_hz, 1.0, cfg.rng_seed,
                    kStreamDarkCoherent, threads);
    return apply_dead_time(series, cfg.dead_time_s);
}

SpdcPair gen_spdc(const SimConfig& cfg, std::vector<std::string>* warnings,
                  unsigned threads) {
    cfg.validate();
    if (cfg.kind != SourceKind::spdc_pair)
        throw ArgumentError("gen_spdc: config kind is not spdc_pair");
    if (cfg.mode_time_s < cfg.resolution_s)
        throw ArgumentError("gen_spdc: mode_time_s below resolution_s");

    const std::uint64_t slots = cfg.slot_count();
    const std::uint64_t mode_slots = static_cast<std::uint64_t>(
        std::llround(cfg.mode_time_s / cfg.resolution_s));
    const std::uint64_t modes = slots / mode_slots;
    const double occupancy = cfg.pairs_per_mode();
    const double idler_eff = cfg.efficiency_idler * cfg.heralding_scale();
    check_saturation(occupancy * std::max(cfg.efficiency_signal, idler_eff) /
                             static_cast<double>(mode_slots) +
                         cfg.dark_rate_hz * cfg.resolution_s,
                     warnings);

    EventSeries signal(cfg.resolution_s, slots);
    EventSeries idler(cfg.resolution_s, slots);

    // Fixed-size mode ranges, one derived stream each. Draw order per mode
    // is pinned (pair count, then 4 uniforms per pair), so efficiency
    // changes replay the same random numbers.
    constexpr std::uint64_t kModesPerRange = 4096;
    const std::uint64_t ranges =
        modes == 0 ? 0 : (modes + kModesPerRange - 1) / kModesPerRange;
    const double msl = static_cast<double>(mode_slots);
    parallel_indices(ranges, threads, [&](std::uint64_t r) {
        auto rng = make_stream(cfg.rng_seed, kStreamPairs, r);
        const std::uint64_t m_end =
            std::min(modes, (r + 1) * kModesPerRange);
        for (std::uint64_t m = r * kModesPerRange; m < m_end; ++m) {
            const std::uint64_t pairs = sample_bose_einstein(rng, occupancy);
            const std::uint64_t base = m * mode_slots;
            for (std::uint64_t p = 0; p < pairs; ++p) {
                const double u_det_s = rng.uniform01();
                const double u_det_i = rng.uniform01();
                const double u_pos_s = rng.uniform01();
                const double u_pos_i = rng.uniform01();
                if (u_det_s < cfg.efficiency_signal)
                    signal.set_atomic(
                        base + static_cast<std::uint64_t>(u_pos_s * msl));
                if (u_det_i < idler_eff)
                    idler.set_atomic(
                        base + static_cast<std::uint64_t>(u_pos_i * msl));
            }
        }
    });
    // Tail slots past the last whole mode carry no pairs, but dark counts
    // still cover the whole span.
    scatter_poisson(signal, cfg.dark_rate_hz, 1.0, cfg.rng_seed,
                    kStreamDarkSignal, threads);
    scatter_poisson(idler, cfg.dark_rate_hz, 1.0, cfg.rng_seed,
                    kStreamDarkIdler, threads);

    SpdcPair out;
    out.signal = apply_dead_time(signal, cfg.dead_time_s);
    out.idler = apply_dead_time(idler, cfg.dead_time_s);
    return out;
}

AnalogTrace synth_trace(const EventSeries& events, double pulse_width_s,
                        double pulse_amplitude_v,
                        const std::string& channel_label) {
    if (!(pulse_width_s > 0.0) || !std::isfinite(pulse_amplitude_v))
        throw ArgumentError("synth_trace: bad pulse shape");
    AnalogTrace trace;
    trace.sample_period_s = events.resolution_s();
    trace.channel_label = channel_label;
    trace.samples.assign(events.slot_count(), 0.0f);
    const std::uint64_t width = std::min(
        events.slot_count(),
        std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(
                   std::llround(pulse_width_s / events.resolution_s()))));
    const float amp = static_cast<float>(pulse_amplitude_v);
    for (const std::uint64_t slot : events.event_slots()) {
        const std::uint64_t end =
            std::min<std::uint64_t>(events.slot_count(), slot + width);
        std::fill(trace.samples.begin() + static_cast<std::ptrdiff_t>(slot),
                  trace.samples.begin() + static_cast<std::ptrdiff_t>(end),
                  amp);
    }
    return trace;
}

} // namespace photonstat
