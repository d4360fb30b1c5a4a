#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "soundmine/errors.hpp"
#include "soundmine/parms.hpp"

namespace soundmine::rawdat {

// Sidecar `<name>.meta` describing a headerless PCM dump.
struct Sidecar {
    int sample_rate = 0;
    int channels = 0;
    std::string encoding;  // int16le | float32le
    std::int64_t header_bytes = 0;
    std::optional<double> start_time;  // optional epoch seconds
};

inline std::string sidecar_path(const std::string& data_path) {
    return data_path + ".meta";
}

inline Sidecar read_sidecar(const std::string& data_path) {
    ParmSet meta = parse_parm_file(sidecar_path(data_path));
    Sidecar sc;
    for (const char* key : {"sample_rate", "channels", "encoding"})
        if (!meta.contains(key))
            throw CorruptContainerError(sidecar_path(data_path) + ": missing key '" +
                                        key + "'");
    sc.sample_rate = static_cast<int>(meta.get_int("sample_rate"));
    sc.channels = static_cast<int>(meta.get_int("channels"));
    sc.encoding = meta.get_string("encoding");
    if (meta.contains("header_bytes")) sc.header_bytes = meta.get_int("header_bytes");
    if (meta.contains("start_time")) sc.start_time = meta.get_float("start_time");
    if (sc.sample_rate < 1 || sc.channels < 1 || sc.header_bytes < 0)
        throw CorruptContainerError(sidecar_path(data_path) + ": invalid field values");
    if (sc.encoding != "int16le" && sc.encoding != "float32le")
        throw CorruptContainerError(sidecar_path(data_path) + ": unsupported encoding '" +
                                    sc.encoding + "'");
    return sc;
}

inline int sample_bytes(const Sidecar& sc) { return sc.encoding == "int16le" ? 2 : 4; }

inline std::int64_t frame_count(const std::string& data_path, const Sidecar& sc) {
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + data_path);
    in.seekg(0, std::ios::end);
    std::int64_t size = in.tellg();
    std::int64_t payload = size - sc.header_bytes;
    if (payload < 0) payload = 0;
    return payload / (static_cast<std::int64_t>(sample_bytes(sc)) * sc.channels);
}

struct RangeResult {
    std::vector<float> samples;
    bool truncated = false;
};

inline RangeResult decode_range(const std::string& data_path, const Sidecar& sc,
                                std::int64_t begin, std::int64_t end, int channel) {
    if (channel < 0 || channel >= sc.channels)
        throw OutOfRangeError(data_path + ": channel out of range");
    if (begin < 0 || end < begin) throw OutOfRangeError(data_path + ": bad frame range");

    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + data_path);
    const int bytes = sample_bytes(sc);
    const std::int64_t frame_bytes = static_cast<std::int64_t>(bytes) * sc.channels;
    in.seekg(sc.header_bytes + begin * frame_bytes);

    RangeResult out;
    std::int64_t count = end - begin;
    std::vector<unsigned char> raw(static_cast<std::size_t>(count * frame_bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    std::int64_t got = in.gcount() / frame_bytes;
    if (got < count) out.truncated = true;

    out.samples.resize(static_cast<std::size_t>(got));
    for (std::int64_t i = 0; i < got; ++i) {
        const unsigned char* p = raw.data() + i * frame_bytes + channel * bytes;
        if (bytes == 2) {
            auto s = static_cast<std::int16_t>(std::uint16_t(p[0]) | (std::uint16_t(p[1]) << 8));
            out.samples[static_cast<std::size_t>(i)] = static_cast<float>(s) / 32768.0f;
        } else {
            std::uint32_t b = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                              (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
            float v;
            std::memcpy(&v, &b, 4);
            out.samples[static_cast<std::size_t>(i)] = v;
        }
    }
    return out;
}

}  // namespace soundmine::rawdat
