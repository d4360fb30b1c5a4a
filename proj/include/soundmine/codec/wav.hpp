#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "soundmine/errors.hpp"

namespace soundmine::wav {

struct WavInfo {
    int sample_rate = 0;
    int channels = 0;
    std::int64_t frames = 0;   // decodable frames (clamped to actual file size)
    int bits_per_sample = 0;   // 16, 24, 32
    bool float_format = false; // IEEE float32
    std::int64_t data_offset = 0;
    int block_align = 0;
    bool truncated = false;    // data chunk declared more frames than the file holds
};

namespace detail {

inline std::uint32_t le32(const unsigned char* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

inline std::uint16_t le16(const unsigned char* p) {
    return std::uint16_t(p[0]) | (std::uint16_t(p[1]) << 8);
}

inline std::int64_t file_size(std::ifstream& in) {
    auto cur = in.tellg();
    in.seekg(0, std::ios::end);
    std::int64_t n = in.tellg();
    in.seekg(cur);
    return n;
}

}  // namespace detail

// Parses the RIFF header and locates the data chunk. Throws CorruptContainerError
// on malformed containers; a short data chunk sets `truncated` instead.
inline WavInfo probe(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::int64_t size = detail::file_size(in);

    unsigned char riff[12];
    if (!in.read(reinterpret_cast<char*>(riff), 12))
        throw CorruptContainerError(path + ": not a RIFF file");
    if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0)
        throw CorruptContainerError(path + ": not a WAVE file");

    WavInfo info;
    std::uint16_t format_code = 0;
    bool have_fmt = false;
    std::int64_t data_size = -1;

    std::int64_t pos = 12;
    while (pos + 8 <= size) {
        in.seekg(pos);
        unsigned char hdr[8];
        if (!in.read(reinterpret_cast<char*>(hdr), 8)) break;
        std::uint32_t chunk_size = detail::le32(hdr + 4);
        std::int64_t body = pos + 8;

        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw CorruptContainerError(path + ": fmt chunk too small");
            std::vector<unsigned char> fmt(chunk_size);
            if (!in.read(reinterpret_cast<char*>(fmt.data()), chunk_size))
                throw CorruptContainerError(path + ": fmt chunk truncated");
            format_code = detail::le16(fmt.data());
            info.channels = detail::le16(fmt.data() + 2);
            info.sample_rate = static_cast<int>(detail::le32(fmt.data() + 4));
            info.block_align = detail::le16(fmt.data() + 12);
            info.bits_per_sample = detail::le16(fmt.data() + 14);
            if (format_code == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE
                if (chunk_size < 40)
                    throw CorruptContainerError(path + ": extensible fmt chunk too small");
                format_code = detail::le16(fmt.data() + 24);  // first 2 bytes of SubFormat
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            info.data_offset = body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks pad to even
    }

    if (!have_fmt || data_size < 0)
        throw CorruptContainerError(path + ": missing fmt or data chunk");
    if (info.channels < 1 || info.sample_rate < 1 || info.block_align < 1)
        throw CorruptContainerError(path + ": invalid fmt fields");

    if (format_code == 3) {
        if (info.bits_per_sample != 32)
            throw CorruptContainerError(path + ": only 32-bit float WAV supported");
        info.float_format = true;
    } else if (format_code == 1) {
        if (info.bits_per_sample != 16 && info.bits_per_sample != 24 &&
            info.bits_per_sample != 32)
            throw CorruptContainerError(path + ": unsupported PCM width " +
                                        std::to_string(info.bits_per_sample));
    } else {
        throw CorruptContainerError(path + ": unsupported WAV format code " +
                                    std::to_string(format_code));
    }
    if (info.block_align != info.channels * (info.bits_per_sample / 8))
        throw CorruptContainerError(path + ": block align mismatch");

    std::int64_t declared = data_size / info.block_align;
    std::int64_t available = (size - info.data_offset) / info.block_align;
    if (available < 0) available = 0;
    info.frames = declared <= available ? declared : available;
    info.truncated = declared > available;
    return info;
}

struct RangeResult {
    std::vector<float> samples;  // one channel, normalized to [-1, 1]
    bool truncated = false;      // requested frames past the decodable end
};

// Decodes frames [begin, end) of one channel. Integer PCM is normalized by
// 2^(bits-1); frames past the decodable end are dropped and flagged.
inline RangeResult decode_range(const std::string& path, std::int64_t begin,
                                std::int64_t end, int channel) {
    WavInfo info = probe(path);
    if (channel < 0 || channel >= info.channels)
        throw OutOfRangeError(path + ": channel " + std::to_string(channel) +
                              " out of range");
    if (begin < 0 || end < begin) throw OutOfRangeError(path + ": bad frame range");

    RangeResult out;
    std::int64_t stop = end;
    if (stop > info.frames) {
        stop = info.frames;
        out.truncated = true;
    }
    if (begin >= stop) {
        out.truncated = out.truncated || begin < end;
        return out;
    }

    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    in.seekg(info.data_offset + begin * info.block_align);

    std::int64_t count = stop - begin;
    std::vector<unsigned char> raw(static_cast<std::size_t>(count * info.block_align));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    std::int64_t got = in.gcount() / info.block_align;
    if (got < count) out.truncated = true;

    out.samples.resize(static_cast<std::size_t>(got));
    const int bytes = info.bits_per_sample / 8;
    const std::size_t chan_off = static_cast<std::size_t>(channel) * bytes;
    for (std::int64_t i = 0; i < got; ++i) {
        const unsigned char* p = raw.data() + i * info.block_align + chan_off;
        float v;
        if (info.float_format) {
            std::uint32_t bits = detail::le32(p);
            std::memcpy(&v, &bits, 4);
        } else if (bytes == 2) {
            auto s = static_cast<std::int16_t>(detail::le16(p));
            v = static_cast<float>(s) / 32768.0f;
        } else if (bytes == 3) {
            std::int32_t s = (std::int32_t(p[0]) << 8) | (std::int32_t(p[1]) << 16) |
                             (std::int32_t(p[2]) << 24);
            s >>= 8;  // sign-extend from 24 bits
            v = static_cast<float>(s) / 8388608.0f;
        } else {
            auto s = static_cast<std::int32_t>(detail::le32(p));
            v = static_cast<float>(static_cast<double>(s) / 2147483648.0);
        }
        out.samples[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

}  // namespace soundmine::wav
