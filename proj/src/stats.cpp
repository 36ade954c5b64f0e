#include "photonstat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "photonstat/errors.hpp"

namespace photonstat {

std::vector<std::uint64_t> bin_counts(const EventSeries& series,
                                      std::uint64_t bin_width_slots) {
    if (bin_width_slots < 1)
        throw ArgumentError("bin_counts: bin width must be >= 1 slot");
    const std::uint64_t bins = series.slot_count() / bin_width_slots;
    std::vector<std::uint64_t> counts;
    counts.reserve(bins);
    for (std::uint64_t k = 0; k < bins; ++k)
        counts.push_back(series.count_range(k * bin_width_slots,
                                            (k + 1) * bin_width_slots));
    return counts;
}

std::uint64_t calibrate_bin_width(const EventSeries& series,
                                  double target_mean) {
    if (!(target_mean > 0.0) || !std::isfinite(target_mean))
        throw ArgumentError("calibrate: target mean must be positive");
    const std::uint64_t n = series.slot_count();
    if (n == 0 || series.count() == 0)
        throw StatsError(
            "calibrate: series has no events, mean can never reach target");

    const PrefixPopcount prefix(series);
    // mean(w) computed exactly as the exhaustive scan would: integer event
    // count over the covered slots divided by the bin count, in double.
    const auto mean_at = [&](std::uint64_t w, std::uint64_t bins) {
        return static_cast<double>(prefix.count_prefix(bins * w)) /
               static_cast<double>(bins);
    };

    std::uint64_t best_w = 1;
    double best_diff = std::numeric_limits<double>::infinity();
    const auto consider = [&](std::uint64_t w, std::uint64_t bins) {
        const double diff = std::fabs(mean_at(w, bins) - target_mean);
        if (diff < best_diff) { // ascending visits keep ties at smaller w
            best_diff = diff;
            best_w = w;
        }
    };
    // Smallest w in [lo, hi] with pred(w) true; pred monotone in w.
    const auto lower_bound_w = [](std::uint64_t lo, std::uint64_t hi,
                                  auto pred) {
        while (lo < hi) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (pred(mid))
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    };

    // Group widths by bins = n / w; within a group mean(w) is
    // non-decreasing, so |mean - target| is V-shaped and the minimum sits
    // where mean(w) crosses the target.
    for (std::uint64_t w = 1; w <= n;) {
        const std::uint64_t bins = n / w;
        const std::uint64_t w_hi = n / bins;
        if (mean_at(w, bins) >= target_mean) {
            consider(w, bins);
        } else if (mean_at(w_hi, bins) < target_mean) {
            // Entire group below target: closest at the largest mean, but
            // the tie-break wants the smallest w attaining it.
            const std::uint64_t top = prefix.count_prefix(bins * w_hi);
            consider(lower_bound_w(w, w_hi,
                                   [&](std::uint64_t m) {
                                       return prefix.count_prefix(bins * m) >=
                                              top;
                                   }),
                     bins);
        } else {
            const std::uint64_t cross =
                lower_bound_w(w, w_hi, [&](std::uint64_t m) {
                    return mean_at(m, bins) >= target_mean;
                });
            // Candidate below the crossing: smallest w holding that count.
            const std::uint64_t below = prefix.count_prefix(bins * (cross - 1));
            consider(lower_bound_w(w, cross - 1,
                                   [&](std::uint64_t m) {
                                       return prefix.count_prefix(bins * m) >=
                                              below;
                                   }),
                     bins);
            consider(cross, bins);
        }
        w = w_hi + 1;
    }
    return best_w;
}

EventSeries herald(const EventSeries& signal, const EventSeries& idler,
                   std::uint64_t window_slots, WindowMode mode) {
    if (signal.resolution_s() != idler.resolution_s())
        throw ArgumentError("herald: signal and idler resolutions differ");
    if (signal.slot_count() != idler.slot_count())
        throw ArgumentError("herald: signal and idler lengths differ");

    EventSeries out(signal.resolution_s(), signal.slot_count(),
                    signal.origin_s());
    // Windows wider than the series behave as "whole series".
    window_slots = std::min(window_slots, signal.slot_count());
    const auto signal_slots = signal.event_slots();
    const auto idler_slots = idler.event_slots();
    std::size_t j = 0;
    for (const std::uint64_t s : signal_slots) {
        const std::uint64_t lo = s >= window_slots ? s - window_slots : 0;
        const std::uint64_t hi =
            mode == WindowMode::symmetric ? s + window_slots : s;
        while (j < idler_slots.size() && idler_slots[j] < lo) ++j;
        if (j < idler_slots.size() && idler_slots[j] <= hi) out.set(s);
    }
    return out;
}

CountHistogram histogram(const std::vector<std::uint64_t>& counts,
                         std::uint64_t bin_width_slots) {
    if (counts.empty())
        throw ArgumentError("histogram: empty counts sequence");
    if (bin_width_slots < 1)
        throw ArgumentError("histogram: bin width must be >= 1 slot");
    CountHistogram h;
    h.bin_width_slots = bin_width_slots;
    h.total_bins = counts.size();
    const std::uint64_t max_n = *std::max_element(counts.begin(), counts.end());
    h.counts_per_n.assign(max_n + 1, 0);
    for (const std::uint64_t c : counts) ++h.counts_per_n[c];
    return h;
}

Moments moments(const CountHistogram& h) {
    if (h.total_bins < 1)
        throw ArgumentError("moments: histogram has no bins");
    std::uint64_t sum_n = 0, sum_n2 = 0;
    for (std::uint64_t n = 0; n < h.counts_per_n.size(); ++n) {
        sum_n += n * h.counts_per_n[n];
        sum_n2 += n * n * h.counts_per_n[n];
    }
    Moments m;
    const double total = static_cast<double>(h.total_bins);
    m.mean = static_cast<double>(sum_n) / total;
    m.variance =
        std::max(0.0, static_cast<double>(sum_n2) / total - m.mean * m.mean);
    return m;
}

double mandel_q(double mean, double variance) {
    if (!(mean > 0.0) || !std::isfinite(mean))
        throw ArgumentError("mandel_q: mean must be positive");
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw ArgumentError("mandel_q: variance must be >= 0");
    return (variance - mean) / mean;
}

QReport aggregate(const std::vector<double>& qs) {
    if (qs.size() < 2)
        throw ArgumentError("aggregate: need at least 2 iterations");
    QReport report;
    report.per_iteration_q = qs;
    double sum = 0.0;
    for (const double q : qs) sum += q;
    report.q_mean = sum / static_cast<double>(qs.size());
    double ss = 0.0;
    for (const double q : qs) ss += (q - report.q_mean) * (q - report.q_mean);
    report.q_std = std::sqrt(ss / static_cast<double>(qs.size() - 1));
    return report;
}

} // namespace photonstat
