#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qrng {

enum class BitOrigin : std::uint8_t { Raw = 0, Stage1 = 1, Unbiased = 2 };

std::string_view bit_origin_name(BitOrigin origin);

/// Packed bit sequence, MSB-first within each byte. Pad bits beyond
/// length_bits are always zero.
class BitStream {
public:
    BitStream() = default;
    explicit BitStream(BitOrigin origin) : origin_(origin) {}

    static BitStream from_bits(const std::vector<std::uint8_t>& bits,
                               BitOrigin origin = BitOrigin::Raw);
    /// "0110..." convenience, mostly for tests.
    static BitStream from_string(std::string_view text, BitOrigin origin = BitOrigin::Raw);

    void push_back(bool bit) {
        const std::size_t byte = length_bits_ >> 3;
        if (byte == data_.size()) data_.push_back(0);
        if (bit) data_[byte] |= static_cast<std::uint8_t>(0x80u >> (length_bits_ & 7));
        ++length_bits_;
    }

    bool operator[](std::uint64_t i) const {
        return (data_[i >> 3] >> (7 - (i & 7))) & 1u;
    }

    std::uint64_t size() const { return length_bits_; }
    bool empty() const { return length_bits_ == 0; }
    const std::vector<std::uint8_t>& bytes() const { return data_; }
    BitOrigin origin() const { return origin_; }
    void set_origin(BitOrigin origin) { origin_ = origin; }

    std::vector<std::uint8_t> unpack() const;
    std::string to_string() const;

    friend bool operator==(const BitStream&, const BitStream&) = default;

private:
    std::vector<std::uint8_t> data_;
    std::uint64_t length_bits_ = 0;
    BitOrigin origin_ = BitOrigin::Raw;
};

/// QBIT container: 16-byte header (magic "QBIT1\0", u16 version = 1,
/// u64 little-endian bit length), then ceil(length/8) payload bytes packed
/// MSB-first with zero padding. The explicit bit length keeps pad bits out
/// of any downstream consumer.
void write_qbit_file(const std::filesystem::path& path, const BitStream& bits);
BitStream read_qbit_file(const std::filesystem::path& path);

/// Interoperability import: '0'/'1' characters, whitespace/commas ignored.
BitStream bits_from_csv_text(std::string_view text);

}  // namespace qrng
