#include "qrng/bitstream.hpp"

#include <cstring>
#include <fstream>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

constexpr char kMagic[6] = {'Q', 'B', 'I', 'T', '1', '\0'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::string_view bit_origin_name(BitOrigin origin) {
    switch (origin) {
        case BitOrigin::Raw: return "raw";
        case BitOrigin::Stage1: return "stage1";
        case BitOrigin::Unbiased: return "unbiased";
    }
    return "unknown";
}

BitStream BitStream::from_bits(const std::vector<std::uint8_t>& bits, BitOrigin origin) {
    BitStream out(origin);
    out.data_.reserve((bits.size() + 7) / 8);
    for (const std::uint8_t b : bits) out.push_back(b != 0);
    return out;
}

BitStream BitStream::from_string(std::string_view text, BitOrigin origin) {
    BitStream out(origin);
    for (const char c : text) {
        if (c == '0') out.push_back(false);
        else if (c == '1') out.push_back(true);
        else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',') continue;
        else throw ConfigError(std::string("BitStream::from_string: bad character '") + c +
                               "'");
    }
    return out;
}

std::vector<std::uint8_t> BitStream::unpack() const {
    std::vector<std::uint8_t> bits(length_bits_);
    for (std::uint64_t i = 0; i < length_bits_; ++i) bits[i] = (*this)[i] ? 1 : 0;
    return bits;
}

std::string BitStream::to_string() const {
    std::string s;
    s.reserve(length_bits_);
    for (std::uint64_t i = 0; i < length_bits_; ++i) s.push_back((*this)[i] ? '1' : '0');
    return s;
}

void write_qbit_file(const std::filesystem::path& path, const BitStream& bits) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(kMagic, sizeof(kMagic));
        const std::uint16_t version = kVersion;
        out.write(reinterpret_cast<const char*>(&version), sizeof(version));
        const std::uint64_t n = bits.size();
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        if (!bits.bytes().empty())
            out.write(reinterpret_cast<const char*>(bits.bytes().data()),
                      static_cast<std::streamsize>(bits.bytes().size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

BitStream read_qbit_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    char magic[6] = {};
    in.read(magic, sizeof(magic));
    if (in.gcount() != sizeof(magic) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("bad magic in " + path.string() + ": expected 'QBIT1\\0'", 0);
    std::uint16_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (in.gcount() != sizeof(version) || version != kVersion)
        throw FormatError("unsupported QBIT version " + std::to_string(version) + " in " +
                              path.string(),
                          6);
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (in.gcount() != sizeof(n))
        throw FormatError("truncated QBIT header in " + path.string(), 8);
    const std::uint64_t n_bytes = (n + 7) / 8;
    std::vector<char> payload(n_bytes);
    in.read(payload.data(), static_cast<std::streamsize>(n_bytes));
    if (static_cast<std::uint64_t>(in.gcount()) != n_bytes)
        throw FormatError("truncated QBIT payload in " + path.string() +
                              " (expected " + std::to_string(n_bytes) + " bytes)",
                          16 + static_cast<std::size_t>(in.gcount()));

    BitStream bits;
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint8_t byte = static_cast<std::uint8_t>(payload[i >> 3]);
        bits.push_back((byte >> (7 - (i & 7))) & 1u);
    }
    // pad bits must be zero
    if (n_bytes > 0) {
        const unsigned used = static_cast<unsigned>(n & 7);
        if (used != 0) {
            const std::uint8_t pad_mask = static_cast<std::uint8_t>(0xFFu >> used);
            if (static_cast<std::uint8_t>(payload[n_bytes - 1]) & pad_mask)
                throw FormatError("nonzero pad bits in " + path.string(),
                                  16 + static_cast<std::size_t>(n_bytes) - 1);
        }
    }
    return bits;
}

BitStream bits_from_csv_text(std::string_view text) {
    return BitStream::from_string(text);
}

}  // namespace qrng
