#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

// Binary detection record: one bit per time slot, 1 = detection onset in
// that slot. Packed 64 slots per word, LSB = earliest slot of the word.
// A 20.5 Mpt trace therefore costs ~2.5 MB instead of ~160 MB.

namespace photonstat {

class EventSeries {
  public:
    static constexpr std::uint64_t kSlotsPerWord = 64;

    EventSeries() = default;
    EventSeries(double resolution_s, std::uint64_t slot_count,
                double origin_s = 0.0);

    double resolution_s() const { return resolution_s_; }
    double origin_s() const { return origin_s_; }
    std::uint64_t slot_count() const { return slot_count_; }
    bool empty() const { return slot_count_ == 0; }

    bool test(std::uint64_t slot) const {
        return (words_[slot / 64] >> (slot % 64)) & 1u;
    }
    void set(std::uint64_t slot);
    // Thread-safe bit set for parallel generation over disjoint slot ranges
    // whose packed words may straddle a range boundary.
    void set_atomic(std::uint64_t slot);

    std::uint64_t count() const;
    // Popcount over slots [first, last).
    std::uint64_t count_range(std::uint64_t first, std::uint64_t last) const;
    // Indices of all 1-bits, ascending.
    std::vector<std::uint64_t> event_slots() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> mutable_words() { return words_; }

    bool operator==(const EventSeries&) const = default;

  private:
    double resolution_s_ = 1e-9;
    double origin_s_ = 0.0;
    std::uint64_t slot_count_ = 0;
    std::vector<std::uint64_t> words_;
};

// Cumulative popcounts: entry w = number of 1-bits in words [0, w).
// Lets count_prefix() answer any prefix popcount in O(1); used by the
// bin-width calibration scan.
class PrefixPopcount {
  public:
    explicit PrefixPopcount(const EventSeries& series);
    // 1-bits among slots [0, n).
    std::uint64_t count_prefix(std::uint64_t n) const;

  private:
    const EventSeries* series_;
    std::vector<std::uint64_t> cumulative_;
};

// PHSEVNT1 container: magic "PHSEVNT1", f64 resolution_s, f64 origin_s,
// u64 slot count, then ceil(slots/64) little-endian u64 words.
void write_event_series(const EventSeries& series, std::ostream& out);
void write_event_series(const EventSeries& series,
                        const std::filesystem::path& path);
EventSeries read_event_series(std::istream& in);
EventSeries read_event_series(const std::filesystem::path& path);

} // namespace photonstat
