#include "nvsim/stream_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <vector>

namespace nvsim::io {

namespace {

void put_u32(unsigned char* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

void put_u64(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

} // namespace

void write_stream(const PhotonStream& stream, const std::string& path) {
    stream.validate();
    const std::string tmp = path + ".tmp";
    FilePtr f(std::fopen(tmp.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + tmp);

    unsigned char header[32] = {0};
    std::memcpy(header, kStreamMagic, 8);
    put_u32(header + 8, kStreamVersion);
    put_u64(header + 16, stream.duration_ps);
    put_u64(header + 24, stream.size());
    if (std::fwrite(header, 1, sizeof header, f.get()) != sizeof header)
        throw std::runtime_error("short write: " + tmp);

    std::vector<unsigned char> buf(8 * 4096);
    std::size_t fill = 0;
    for (std::uint64_t t : stream.timestamps_ps) {
        put_u64(buf.data() + fill, t);
        fill += 8;
        if (fill == buf.size()) {
            if (std::fwrite(buf.data(), 1, fill, f.get()) != fill)
                throw std::runtime_error("short write: " + tmp);
            fill = 0;
        }
    }
    if (fill && std::fwrite(buf.data(), 1, fill, f.get()) != fill)
        throw std::runtime_error("short write: " + tmp);
    if (std::fflush(f.get()) != 0)
        throw std::runtime_error("flush failed: " + tmp);
    f.reset();
    std::filesystem::rename(tmp, path);
}

PhotonStream read_stream(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open stream file: " + path);

    unsigned char header[32];
    if (std::fread(header, 1, sizeof header, f.get()) != sizeof header)
        throw std::runtime_error("stream file truncated in header: " + path);
    if (std::memcmp(header, kStreamMagic, 8) != 0)
        throw std::runtime_error("not a photon stream file (bad magic): " + path);
    const std::uint32_t version = get_u32(header + 8);
    if (version != kStreamVersion)
        throw std::runtime_error("unsupported stream version " + std::to_string(version) +
                                 ": " + path);

    PhotonStream stream;
    stream.duration_ps = get_u64(header + 16);
    const std::uint64_t count = get_u64(header + 24);
    stream.label = std::filesystem::path(path).stem().string();
    stream.timestamps_ps.resize(count);

    std::vector<unsigned char> buf(8 * 4096);
    std::size_t done = 0;
    while (done < count) {
        const std::size_t want = std::min<std::size_t>(count - done, buf.size() / 8);
        if (std::fread(buf.data(), 8, want, f.get()) != want)
            throw std::runtime_error("stream file truncated in payload: " + path);
        for (std::size_t i = 0; i < want; ++i)
            stream.timestamps_ps[done + i] = get_u64(buf.data() + 8 * i);
        done += want;
    }
    try {
        stream.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("corrupt stream file (" + std::string(e.what()) + "): " + path);
    }
    return stream;
}

} // namespace nvsim::io
