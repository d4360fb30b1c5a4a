#pragma once

// Minimal WAV writer for test fixtures. Written against the RIFF layout
// directly so it stays independent of the decoder under test.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testsupport {

namespace detail {

inline void put16(std::vector<unsigned char>& b, std::uint16_t v) {
    b.push_back(v & 0xFF);
    b.push_back((v >> 8) & 0xFF);
}

inline void put32(std::vector<unsigned char>& b, std::uint32_t v) {
    b.push_back(v & 0xFF);
    b.push_back((v >> 8) & 0xFF);
    b.push_back((v >> 16) & 0xFF);
    b.push_back((v >> 24) & 0xFF);
}

inline std::vector<unsigned char> wav_bytes(int sample_rate, int channels,
                                            int bits_per_sample, bool float_format,
                                            const std::vector<unsigned char>& payload) {
    std::vector<unsigned char> b;
    const int block_align = channels * bits_per_sample / 8;
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    put32(b, static_cast<std::uint32_t>(4 + 8 + 16 + 8 + payload.size()));
    b.insert(b.end(), {'W', 'A', 'V', 'E'});
    b.insert(b.end(), {'f', 'm', 't', ' '});
    put32(b, 16);
    put16(b, float_format ? 3 : 1);
    put16(b, static_cast<std::uint16_t>(channels));
    put32(b, static_cast<std::uint32_t>(sample_rate));
    put32(b, static_cast<std::uint32_t>(sample_rate * block_align));
    put16(b, static_cast<std::uint16_t>(block_align));
    put16(b, static_cast<std::uint16_t>(bits_per_sample));
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    put32(b, static_cast<std::uint32_t>(payload.size()));
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

inline void write_file(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write fixture: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace detail

// channels[c][i] are raw integer codes.
inline void write_wav_int16(const std::string& path, int sample_rate,
                            const std::vector<std::vector<std::int16_t>>& channels) {
    const std::size_t frames = channels.at(0).size();
    std::vector<unsigned char> payload;
    for (std::size_t i = 0; i < frames; ++i)
        for (const auto& ch : channels)
            detail::put16(payload, static_cast<std::uint16_t>(ch[i]));
    detail::write_file(path, detail::wav_bytes(sample_rate,
                                               static_cast<int>(channels.size()), 16,
                                               false, payload));
}

inline void write_wav_int24(const std::string& path, int sample_rate,
                            const std::vector<std::vector<std::int32_t>>& channels) {
    const std::size_t frames = channels.at(0).size();
    std::vector<unsigned char> payload;
    for (std::size_t i = 0; i < frames; ++i)
        for (const auto& ch : channels) {
            std::uint32_t v = static_cast<std::uint32_t>(ch[i]);
            payload.push_back(v & 0xFF);
            payload.push_back((v >> 8) & 0xFF);
            payload.push_back((v >> 16) & 0xFF);
        }
    detail::write_file(path, detail::wav_bytes(sample_rate,
                                               static_cast<int>(channels.size()), 24,
                                               false, payload));
}

inline void write_wav_int32(const std::string& path, int sample_rate,
                            const std::vector<std::vector<std::int32_t>>& channels) {
    const std::size_t frames = channels.at(0).size();
    std::vector<unsigned char> payload;
    for (std::size_t i = 0; i < frames; ++i)
        for (const auto& ch : channels)
            detail::put32(payload, static_cast<std::uint32_t>(ch[i]));
    detail::write_file(path, detail::wav_bytes(sample_rate,
                                               static_cast<int>(channels.size()), 32,
                                               false, payload));
}

inline void write_wav_float(const std::string& path, int sample_rate,
                            const std::vector<std::vector<float>>& channels) {
    const std::size_t frames = channels.at(0).size();
    std::vector<unsigned char> payload;
    for (std::size_t i = 0; i < frames; ++i)
        for (const auto& ch : channels) {
            std::uint32_t bits;
            static_assert(sizeof(float) == 4);
            std::memcpy(&bits, &ch[i], 4);
            detail::put32(payload, bits);
        }
    detail::write_file(path, detail::wav_bytes(sample_rate,
                                               static_cast<int>(channels.size()), 32,
                                               true, payload));
}

// Float samples in [-1, 1] quantized to int16 codes (round to nearest).
inline void write_wav_float_as_int16(const std::string& path, int sample_rate,
                                     const std::vector<std::vector<float>>& channels) {
    std::vector<std::vector<std::int16_t>> q(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c) {
        q[c].resize(channels[c].size());
        for (std::size_t i = 0; i < channels[c].size(); ++i) {
            long v = std::lround(channels[c][i] * 32768.0f);
            if (v > 32767) v = 32767;
            if (v < -32768) v = -32768;
            q[c][i] = static_cast<std::int16_t>(v);
        }
    }
    write_wav_int16(path, sample_rate, q);
}

}  // namespace testsupport
