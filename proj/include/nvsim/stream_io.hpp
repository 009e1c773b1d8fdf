#pragma once

#include <string>

#include "nvsim/photon_stream.hpp"

namespace nvsim::io {

/// Binary timestamp-stream format, all integers little-endian:
///   bytes  0..7   magic "NVPHSTRM"
///   bytes  8..11  format version (u32), currently 1
///   bytes 12..15  reserved, zero
///   bytes 16..23  duration in picoseconds (u64)
///   bytes 24..31  event count (u64)
/// followed by count sorted u64 picosecond timestamps.
constexpr char kStreamMagic[8] = {'N', 'V', 'P', 'H', 'S', 'T', 'R', 'M'};
constexpr std::uint32_t kStreamVersion = 1;

/// Write atomically (temp file + rename). Throws std::runtime_error on I/O
/// failure; the stream is validated first.
void write_stream(const PhotonStream& stream, const std::string& path);

/// Read and validate. Throws std::runtime_error with a description on bad
/// magic, version, truncation, or unsorted timestamps.
PhotonStream read_stream(const std::string& path);

} // namespace nvsim::io
