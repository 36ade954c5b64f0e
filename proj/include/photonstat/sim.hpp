#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "photonstat/event_series.hpp"
#include "photonstat/trace.hpp"

// Monte-Carlo detection chains: a coherent (Poissonian) source and an SPDC
// pair source whose per-mode pair number is Bose-Einstein distributed, so
// each arm alone is thermal while coincidences are pair-correlated. Both
// run the events through detector efficiency, dark counts and dead time.
//
// Everything is a deterministic function of the config (seed included);
// see rng.hpp for the stream-splitting scheme that keeps outputs
// bit-identical under any thread count.

namespace photonstat {

enum class SourceKind { coherent, spdc_pair };

struct SimConfig {
    SourceKind kind = SourceKind::coherent;
    double duration_s = 0.0; // required
    double resolution_s = 1e-9;

    // Coherent source intensity.
    double photon_rate_hz = 0.0;

    // SPDC source: give either the thermal occupancy per coherence mode or
    // a pair generation rate (converted via mode_time_s), not both.
    double mean_pairs_per_mode = -1.0;
    double pair_rate_hz = -1.0;
    double mode_time_s = 10e-9;

    double efficiency_signal = 1.0;
    double efficiency_idler = 1.0;
    double dark_rate_hz = 0.0; // per arm
    double dead_time_s = 22e-9;

    // Pump OAM order l scales the idler detection probability by
    // p_l = 1/(l+1) unless oam_heralding_scale pins it explicitly.
    unsigned pump_oam_order = 0;
    double oam_heralding_scale = -1.0;

    std::uint64_t rng_seed = 0;

    // Synthetic TTL pulse shape used when emitting analog traces.
    double pulse_width_s = 10e-9;
    double pulse_amplitude_v = 3.3;

    std::uint64_t slot_count() const;
    double heralding_scale() const; // resolved p_l
    double pairs_per_mode() const;  // resolved thermal occupancy
    void validate() const;
};

// Flat key-value text, one "key = value" per line, '#' comments. kind and
// duration_s are required; everything else defaults as above.
SimConfig parse_sim_config(std::istream& in);
SimConfig load_sim_config(const std::filesystem::path& path);

struct SpdcPair {
    EventSeries signal;
    EventSeries idler;
};

// Homogeneous Poisson photon stream thinned by efficiency_signal, plus
// dark counts, then dead time. Appends a saturation warning when the
// expected detection probability per slot exceeds 1.
EventSeries gen_coherent(const SimConfig& cfg,
                         std::vector<std::string>* warnings = nullptr,
                         unsigned threads = 1);

// Per coherence mode: Bose-Einstein pair count; each pair drops one photon
// in each arm, detected independently (idler scaled by p_l) and placed
// uniformly within the mode. Dark counts and dead time per arm. Multiple
// detections in one slot collapse to a single 1-bit (detectors are not
// photon-number resolving).
SpdcPair gen_spdc(const SimConfig& cfg,
                  std::vector<std::string>* warnings = nullptr,
                  unsigned threads = 1);

// Synthetic detector waveform: a flat TTL pulse of the given width starting
// at every event slot, 0 V elsewhere.
AnalogTrace synth_trace(const EventSeries& events, double pulse_width_s,
                        double pulse_amplitude_v,
                        const std::string& channel_label);

} // namespace photonstat
