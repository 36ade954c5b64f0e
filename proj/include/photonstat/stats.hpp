#pragma once

#include <cstdint>
#include <vector>

#include "photonstat/event_series.hpp"

// Photon-number statistics: slice an event series into fixed-width bins,
// histogram the per-bin counts, and reduce to the Mandel Q-parameter
// Q = (<(dn)^2> - <n>) / <n>. Q = 0 is Poissonian light, Q > 0
// super-Poissonian (thermal), Q < 0 sub-Poissonian (non-classical).

namespace photonstat {

struct CountHistogram {
    std::uint64_t bin_width_slots = 1;
    std::uint64_t total_bins = 0;
    // Index n -> number of bins that held exactly n events.
    std::vector<std::uint64_t> counts_per_n;

    double probability(std::uint64_t n) const {
        if (n >= counts_per_n.size() || total_bins == 0) return 0.0;
        return static_cast<double>(counts_per_n[n]) /
               static_cast<double>(total_bins);
    }
};

struct Moments {
    double mean = 0.0;
    double variance = 0.0; // population variance of the recorded counts
};

struct QReport {
    double mean = 0.0;
    double variance = 0.0;
    double q = 0.0;
    std::vector<double> per_iteration_q;
    double q_mean = 0.0;
    double q_std = 0.0; // sample (n-1) standard deviation across iterations
};

// Count of 1-bits per window of bin_width_slots slots; the trailing
// partial bin is discarded. A zero-length series yields an empty sequence.
std::vector<std::uint64_t> bin_counts(const EventSeries& series,
                                      std::uint64_t bin_width_slots);

// The bin width whose mean count sits closest to target_mean, i.e. the
// integer w minimizing |mean(bin_counts(series, w)) - target_mean| over
// w in [1, slot_count], ties broken toward smaller w. Equivalent to the
// exhaustive scan but runs in O(sqrt(n) log n) popcount-prefix lookups.
std::uint64_t calibrate_bin_width(const EventSeries& series,
                                  double target_mean = 1.0);

enum class WindowMode {
    symmetric, // idler accepted in [k - w, k + w] around signal slot k
    forward,   // idler click gates forward in time: idler in [k - w, k]
};

// Coincidence extraction. Output slot k = 1 iff signal slot k = 1 and an
// idler 1-bit lies inside the window. Timestamps follow the signal
// (heralded) arm; one idler event may herald several signal events.
EventSeries herald(const EventSeries& signal, const EventSeries& idler,
                   std::uint64_t window_slots,
                   WindowMode mode = WindowMode::symmetric);

CountHistogram histogram(const std::vector<std::uint64_t>& counts,
                         std::uint64_t bin_width_slots);

// mean = sum n p(n); variance = sum n^2 p(n) - mean^2. The sums are exact
// 64-bit integer accumulations, so no precision is lost even at 2e7 bins.
Moments moments(const CountHistogram& h);

double mandel_q(double mean, double variance);

// Across-iteration aggregation: arithmetic mean and sample (n-1) standard
// deviation of the per-iteration Q values. Requires >= 2 iterations.
QReport aggregate(const std::vector<double>& qs);

} // namespace photonstat
