#include "qrng/ptag.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "qrng/errors.hpp"

namespace qrng {

namespace {

constexpr char kMagic[6] = {'P', 'T', 'A', 'G', '1', '\0'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kRecordSize = 9;

}  // namespace

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

void write_ptag_file(const std::filesystem::path& path, const std::vector<TimeTag>& tags) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        char header[kHeaderSize] = {};
        std::memcpy(header, kMagic, sizeof(kMagic));
        std::memcpy(header + 6, &kVersion, sizeof(kVersion));
        out.write(header, sizeof(header));
        std::vector<char> buffer;
        buffer.reserve(1 << 20);
        for (const auto& tag : tags) {
            const std::uint64_t ts = static_cast<std::uint64_t>(tag.timestamp_ps);
            const char* p = reinterpret_cast<const char*>(&ts);
            buffer.insert(buffer.end(), p, p + 8);
            buffer.push_back(static_cast<char>(tag.detector));
            if (buffer.size() >= (1 << 20)) {
                out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
                buffer.clear();
            }
        }
        if (!buffer.empty())
            out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

std::vector<TimeTag> read_ptag_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    char header[kHeaderSize] = {};
    in.read(header, sizeof(header));
    if (in.gcount() != sizeof(header))
        throw FormatError("truncated PTAG header in " + path.string(),
                          static_cast<std::size_t>(in.gcount()));
    if (std::memcmp(header, kMagic, sizeof(kMagic)) != 0)
        throw FormatError("bad magic in " + path.string() + ": expected 'PTAG1\\0'", 0);
    std::uint16_t version = 0;
    std::memcpy(&version, header + 6, sizeof(version));
    if (version != kVersion)
        throw FormatError("unsupported PTAG version " + std::to_string(version) + " in " +
                              path.string(),
                          6);

    std::vector<TimeTag> tags;
    std::vector<char> buffer(kRecordSize * 4096);
    std::size_t offset = kHeaderSize;
    std::int64_t last_ts = -1;
    std::uint8_t last_det = 0;
    for (;;) {
        in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        const std::size_t got = static_cast<std::size_t>(in.gcount());
        if (got == 0) break;
        if (got % kRecordSize != 0)
            throw FormatError("truncated PTAG record in " + path.string(),
                              offset + (got / kRecordSize) * kRecordSize);
        for (std::size_t r = 0; r < got; r += kRecordSize) {
            std::uint64_t ts = 0;
            std::memcpy(&ts, buffer.data() + r, 8);
            const std::uint8_t det = static_cast<std::uint8_t>(buffer[r + 8]);
            if (det > 2)
                throw FormatError("bad detector id " + std::to_string(det) + " in " +
                                      path.string(),
                                  offset + r + 8);
            const std::int64_t ts_signed = static_cast<std::int64_t>(ts);
            if (ts_signed < last_ts || (ts_signed == last_ts && det <= last_det))
                throw FormatError("PTAG records out of order in " + path.string(),
                                  offset + r);
            last_ts = ts_signed;
            last_det = det;
            tags.push_back({ts_signed, static_cast<Detector>(det)});
        }
        offset += got;
        if (!in) break;
    }
    return tags;
}

void write_tags_csv(const std::filesystem::path& path, const std::vector<TimeTag>& tags) {
    std::ostringstream out;
    out << "timestamp_ps,detector\n";
    for (const auto& tag : tags)
        out << tag.timestamp_ps << ',' << detector_name(tag.detector) << '\n';
    atomic_write_file(path, out.str());
}

std::vector<TimeTag> read_tags_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string line;
    std::vector<TimeTag> tags;
    std::size_t offset = 0;
    bool first = true;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == "timestamp_ps,detector") continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw FormatError("missing comma in tag CSV " + path.string(), line_start);
        char* end = nullptr;
        const long long ts = std::strtoll(line.c_str(), &end, 10);
        if (end != line.c_str() + comma)
            throw FormatError("bad timestamp in tag CSV " + path.string(), line_start);
        tags.push_back({ts, detector_from_name(line.substr(comma + 1))});
    }
    return tags;
}

std::vector<TimeTag> read_tags_auto(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    char magic[6] = {};
    in.read(magic, sizeof(magic));
    in.close();
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) == 0) return read_ptag_file(path);
    return read_tags_csv(path);
}

}  // namespace qrng
