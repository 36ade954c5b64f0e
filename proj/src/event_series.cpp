#include "photonstat/event_series.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "photonstat/errors.hpp"
#include "le_io.hpp"

namespace photonstat {

namespace {
constexpr char kEventMagic[9] = "PHSEVNT1";

std::uint64_t word_count_for(std::uint64_t slots) {
    return (slots + EventSeries::kSlotsPerWord - 1) / EventSeries::kSlotsPerWord;
}

// Mask of valid bits in the final word; padding bits stay zero so that
// popcounts and equality work on whole words.
std::uint64_t tail_mask(std::uint64_t slots) {
    const std::uint64_t rem = slots % 64;
    return rem == 0 ? ~0ull : (1ull << rem) - 1;
}
} // namespace

EventSeries::EventSeries(double resolution_s, std::uint64_t slot_count,
                         double origin_s)
    : resolution_s_(resolution_s), origin_s_(origin_s), slot_count_(slot_count),
      words_(word_count_for(slot_count), 0) {
    if (!(resolution_s > 0.0) || !std::isfinite(resolution_s))
        throw ArgumentError("event series: resolution must be positive");
    if (!std::isfinite(origin_s))
        throw ArgumentError("event series: origin must be finite");
}

void EventSeries::set(std::uint64_t slot) {
    if (slot >= slot_count_)
        throw ArgumentError("event series: slot index out of range");
    words_[slot / 64] |= 1ull << (slot % 64);
}

void EventSeries::set_atomic(std::uint64_t slot) {
    if (slot >= slot_count_)
        throw ArgumentError("event series: slot index out of range");
    std::atomic_ref<std::uint64_t> word(words_[slot / 64]);
    word.fetch_or(1ull << (slot % 64), std::memory_order_relaxed);
}

std::uint64_t EventSeries::count() const {
    std::uint64_t total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
}

std::uint64_t EventSeries::count_range(std::uint64_t first,
                                       std::uint64_t last) const {
    if (first > last || last > slot_count_)
        throw ArgumentError("event series: bad slot range");
    if (first == last) return 0;
    const std::uint64_t wf = first / 64, wl = (last - 1) / 64;
    const std::uint64_t lo_mask = ~0ull << (first % 64);
    const std::uint64_t hi_mask =
        (last % 64) == 0 ? ~0ull : (1ull << (last % 64)) - 1;
    if (wf == wl) return std::popcount(words_[wf] & lo_mask & hi_mask);
    std::uint64_t total = std::popcount(words_[wf] & lo_mask);
    for (std::uint64_t w = wf + 1; w < wl; ++w) total += std::popcount(words_[w]);
    total += std::popcount(words_[wl] & hi_mask);
    return total;
}

std::vector<std::uint64_t> EventSeries::event_slots() const {
    std::vector<std::uint64_t> slots;
    slots.reserve(count());
    for (std::uint64_t w = 0; w < words_.size(); ++w) {
        std::uint64_t bits = words_[w];
        while (bits) {
            const int b = std::countr_zero(bits);
            slots.push_back(w * 64 + static_cast<std::uint64_t>(b));
            bits &= bits - 1;
        }
    }
    return slots;
}

PrefixPopcount::PrefixPopcount(const EventSeries& series) : series_(&series) {
    const auto words = series.words();
    cumulative_.resize(words.size() + 1, 0);
    for (std::size_t w = 0; w < words.size(); ++w)
        cumulative_[w + 1] =
            cumulative_[w] + static_cast<std::uint64_t>(std::popcount(words[w]));
}

std::uint64_t PrefixPopcount::count_prefix(std::uint64_t n) const {
    const std::uint64_t w = n / 64;
    std::uint64_t total = cumulative_[w];
    const std::uint64_t rem = n % 64;
    if (rem != 0)
        total += std::popcount(series_->words()[w] & ((1ull << rem) - 1));
    return total;
}

void write_event_series(const EventSeries& series, std::ostream& out) {
    out.write(kEventMagic, 8);
    detail::put_le(out, series.resolution_s());
    detail::put_le(out, series.origin_s());
    detail::put_le(out, series.slot_count());
    for (std::uint64_t w : series.words()) detail::put_le(out, w);
    if (!out) throw FormatError("event series: write failed");
}

void write_event_series(const EventSeries& series,
                        const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw FormatError("cannot open for writing: " + path.string());
    write_event_series(series, out);
}

EventSeries read_event_series(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8))
        throw FormatError("event series: truncated before magic (byte 0)");
    if (std::memcmp(magic, kEventMagic, 8) != 0)
        throw FormatError("event series: bad magic at byte 0");
    double resolution = 0, origin = 0;
    std::uint64_t slots = 0;
    if (!detail::get_le(in, resolution))
        throw FormatError("event series: truncated header at byte 8");
    if (!detail::get_le(in, origin))
        throw FormatError("event series: truncated header at byte 16");
    if (!detail::get_le(in, slots))
        throw FormatError("event series: truncated header at byte 24");
    if (!(resolution > 0.0) || !std::isfinite(resolution))
        throw DataError("event series: non-positive resolution in header");
    if (!std::isfinite(origin))
        throw DataError("event series: non-finite origin in header");

    EventSeries series = [&] {
        try {
            return EventSeries(resolution, slots, origin);
        } catch (const std::bad_alloc&) {
            throw FormatError(
                "event series: slot count exceeds available memory");
        }
    }();
    auto words = series.mutable_words();
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (!detail::get_le(in, words[w])) {
            std::ostringstream msg;
            msg << "event series: truncated payload at byte " << (32 + 8 * w);
            throw FormatError(msg.str());
        }
    }
    if (!words.empty() && (words.back() & ~tail_mask(slots)) != 0)
        throw FormatError("event series: padding bits set in final word");
    // Must consume the file exactly.
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("event series: trailing bytes after payload");
    return series;
}

EventSeries read_event_series(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open: " + path.string());
    return read_event_series(in);
}

} // namespace photonstat
