#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qrng/timetag.hpp"

namespace qrng {

/// PTAG container: 16-byte header (magic "PTAG1\0", u16 version = 1, 8
/// reserved zero bytes), then fixed 9-byte records of u64 little-endian
/// timestamp_ps followed by a u8 detector id. The fixed stride allows
/// offset arithmetic without parsing.
void write_ptag_file(const std::filesystem::path& path, const std::vector<TimeTag>& tags);
std::vector<TimeTag> read_ptag_file(const std::filesystem::path& path);

/// CSV form: header "timestamp_ps,detector", rows like "1234,R1".
void write_tags_csv(const std::filesystem::path& path, const std::vector<TimeTag>& tags);
std::vector<TimeTag> read_tags_csv(const std::filesystem::path& path);

/// Detects PTAG vs CSV from content.
std::vector<TimeTag> read_tags_auto(const std::filesystem::path& path);

/// Write a file atomically (temp file in the same directory + rename).
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace qrng
