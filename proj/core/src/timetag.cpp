#include "qrng/timetag.hpp"

namespace qrng {

std::vector<std::int64_t> select_channel(const std::vector<TimeTag>& tags, Detector d) {
    std::vector<std::int64_t> out;
    for (const auto& tag : tags)
        if (tag.detector == d) out.push_back(tag.timestamp_ps);
    return out;
}

std::array<std::uint64_t, 3> channel_counts(const std::vector<TimeTag>& tags) {
    std::array<std::uint64_t, 3> counts{};
    for (const auto& tag : tags) ++counts[static_cast<std::size_t>(tag.detector)];
    return counts;
}

}  // namespace qrng
