#include "qrng/extract.hpp"

#include <cmath>
#include <sstream>

#include "qrng/errors.hpp"

namespace qrng {

EncodingRule::EncodingRule(std::vector<Detector> zero_set, std::vector<Detector> one_set,
                           std::vector<Detector> discard_set) {
    auto assign = [this](const std::vector<Detector>& set, Assign value) {
        for (const Detector d : set) {
            auto& slot = map_[static_cast<std::size_t>(d)];
            if (slot != Assign::Unassigned)
                throw ConfigError("encoding rule: detector " +
                                  std::string(detector_name(d)) +
                                  " appears in more than one set");
            slot = value;
        }
    };
    assign(zero_set, Assign::Zero);
    assign(one_set, Assign::One);
    assign(discard_set, Assign::Discard);
}

EncodingRule EncodingRule::reflection_pair() {
    return EncodingRule({Detector::R1}, {Detector::R2}, {Detector::T1});
}

std::string EncodingRule::describe() const {
    std::ostringstream out;
    const char* labels[] = {"0", "1", "discard", "unassigned"};
    for (Detector d : kAllDetectors) {
        if (d != Detector::R1) out << ' ';
        out << detector_name(d) << "->"
            << labels[static_cast<std::size_t>(assignment(d))];
    }
    return out.str();
}

BitStream encode_bits(const std::vector<TimeTag>& tags, const EncodingRule& rule) {
    BitStream out(BitOrigin::Raw);
    for (const auto& tag : tags) {
        switch (rule.assignment(tag.detector)) {
            case EncodingRule::Assign::Zero: out.push_back(false); break;
            case EncodingRule::Assign::One: out.push_back(true); break;
            case EncodingRule::Assign::Discard: break;
            case EncodingRule::Assign::Unassigned:
                throw ConfigError("encode_bits: rule has no assignment for detector " +
                                  std::string(detector_name(tag.detector)));
        }
    }
    return out;
}

BlockDebiaser BlockDebiaser::stage1() {
    // blocks: 00 -> skip, 01 -> skip, 10 -> 0, 11 -> 1
    return BlockDebiaser({-1, -1, 0, 1}, BitOrigin::Stage1);
}

BlockDebiaser BlockDebiaser::von_neumann() {
    // blocks: 00 -> skip, 01 -> 0, 10 -> 1, 11 -> skip
    return BlockDebiaser({-1, 0, 1, -1}, BitOrigin::Unbiased);
}

void BlockDebiaser::feed_bit(bool bit, BitStream& out) {
    if (!has_pending_) {
        pending_ = bit;
        has_pending_ = true;
        return;
    }
    has_pending_ = false;
    const std::int8_t mapped = block_map_[(pending_ ? 2u : 0u) | (bit ? 1u : 0u)];
    if (mapped >= 0) out.push_back(mapped != 0);
}

void BlockDebiaser::feed(const BitStream& chunk, BitStream& out) {
    const std::uint64_t n = chunk.size();
    std::uint64_t i = 0;
    if (has_pending_ && n > 0) {
        feed_bit(chunk[0], out);
        i = 1;
    }
    // aligned whole blocks
    for (; i + 1 < n; i += 2) {
        const std::int8_t mapped =
            block_map_[(chunk[i] ? 2u : 0u) | (chunk[i + 1] ? 1u : 0u)];
        if (mapped >= 0) out.push_back(mapped != 0);
    }
    if (i < n) feed_bit(chunk[i], out);
}

void BlockDebiaser::finish() { has_pending_ = false; }

namespace {

BitStream run_debiaser(BlockDebiaser stage, const BitStream& in, BitOrigin origin) {
    BitStream out(origin);
    stage.feed(in, out);
    stage.finish();  // trailing odd bit dropped
    return out;
}

}  // namespace

BitStream debias_stage1(const BitStream& raw) {
    return run_debiaser(BlockDebiaser::stage1(), raw, BitOrigin::Stage1);
}

BitStream debias_von_neumann(const BitStream& stage1) {
    return run_debiaser(BlockDebiaser::von_neumann(), stage1, BitOrigin::Unbiased);
}

double RateReport::stage1_retention() const {
    if (raw_bits == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(stage1_bits) / static_cast<double>(raw_bits);
}

double RateReport::von_neumann_retention() const {
    if (stage1_bits == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(unbiased_bits) / static_cast<double>(stage1_bits);
}

double RateReport::total_retention() const {
    if (raw_bits == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(unbiased_bits) / static_cast<double>(raw_bits);
}

namespace {

void json_ratio(std::ostringstream& out, const char* key, double value, bool last = false) {
    out << "  \"" << key << "\": ";
    if (std::isnan(value)) out << "null";
    else out << value;
    out << (last ? "\n" : ",\n");
}

}  // namespace

std::string RateReport::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{\n";
    out << "  \"raw_bits\": " << raw_bits << ",\n";
    out << "  \"stage1_bits\": " << stage1_bits << ",\n";
    out << "  \"unbiased_bits\": " << unbiased_bits << ",\n";
    json_ratio(out, "stage1_retention", stage1_retention());
    json_ratio(out, "von_neumann_retention", von_neumann_retention());
    json_ratio(out, "total_retention", total_retention(), true);
    out << "}\n";
    return out.str();
}

CascadeResult debias_cascade(const BitStream& raw) {
    CascadeResult result;
    const BitStream stage1 = debias_stage1(raw);
    result.unbiased = debias_von_neumann(stage1);
    result.rates.raw_bits = raw.size();
    result.rates.stage1_bits = stage1.size();
    result.rates.unbiased_bits = result.unbiased.size();
    return result;
}

}  // namespace qrng
