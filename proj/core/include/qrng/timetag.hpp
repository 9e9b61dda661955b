#pragma once

#include <cstdint>
#include <vector>

#include "qrng/scene.hpp"

namespace qrng {

/// One detection event. Timestamps are integer picoseconds from stream start,
/// matching hardware time-tagger granularity and making runs bit-exactly
/// reproducible. Merged streams are ordered by (timestamp_ps, detector).
struct TimeTag {
    std::int64_t timestamp_ps = 0;
    Detector detector = Detector::R1;

    friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

inline bool timetag_order(const TimeTag& a, const TimeTag& b) {
    if (a.timestamp_ps != b.timestamp_ps) return a.timestamp_ps < b.timestamp_ps;
    return a.detector < b.detector;
}

/// Timestamps of one channel, in picoseconds, preserving order.
std::vector<std::int64_t> select_channel(const std::vector<TimeTag>& tags, Detector d);

/// Per-detector event counts of a merged stream.
std::array<std::uint64_t, 3> channel_counts(const std::vector<TimeTag>& tags);

}  // namespace qrng
