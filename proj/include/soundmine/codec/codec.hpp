#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "soundmine/codec/flac.hpp"
#include "soundmine/codec/rawdat.hpp"
#include "soundmine/codec/wav.hpp"
#include "soundmine/errors.hpp"

namespace soundmine {

enum class FormatTag { WAV, FLAC, RAWDAT };

inline const char* format_tag_name(FormatTag t) {
    switch (t) {
        case FormatTag::WAV: return "WAV";
        case FormatTag::FLAC: return "FLAC";
        default: return "RAWDAT";
    }
}

inline FormatTag format_tag_from_name(const std::string& s) {
    if (s == "WAV") return FormatTag::WAV;
    if (s == "FLAC") return FormatTag::FLAC;
    if (s == "RAWDAT") return FormatTag::RAWDAT;
    throw std::invalid_argument("unknown format tag: " + s);
}

struct AudioFileInfo {
    FormatTag format = FormatTag::WAV;
    int sample_rate = 0;
    int channels = 0;
    std::int64_t frames = 0;
    std::optional<double> sidecar_start_time;
};

// Identifies the container by magic bytes (RIFF/fLaC) with a sidecar
// fallback for headerless dumps, then reads the header fields.
inline AudioFileInfo probe_audio_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.close();

    AudioFileInfo info;
    if (std::memcmp(magic, "RIFF", 4) == 0) {
        wav::WavInfo w = wav::probe(path);
        info.format = FormatTag::WAV;
        info.sample_rate = w.sample_rate;
        info.channels = w.channels;
        info.frames = w.frames;
    } else if (std::memcmp(magic, "fLaC", 4) == 0) {
        flac::FlacInfo f = flac::probe(path);
        info.format = FormatTag::FLAC;
        info.sample_rate = f.sample_rate;
        info.channels = f.channels;
        info.frames = f.total_samples;
    } else if (std::filesystem::exists(rawdat::sidecar_path(path))) {
        rawdat::Sidecar sc = rawdat::read_sidecar(path);
        info.format = FormatTag::RAWDAT;
        info.sample_rate = sc.sample_rate;
        info.channels = sc.channels;
        info.frames = rawdat::frame_count(path, sc);
        info.sidecar_start_time = sc.start_time;
    } else {
        throw CorruptContainerError(path + ": unrecognized container (no RIFF/fLaC magic, no .meta sidecar)");
    }
    if (info.sample_rate < 1) throw CorruptContainerError(path + ": invalid sample rate");
    return info;
}

struct DecodedRange {
    std::vector<float> samples;
    bool truncated = false;
};

// Per-worker cache of fully decoded FLAC files. FLAC has no cheap
// sample-accurate seek without a frame index, so ranges are sliced from a
// whole-file decode; WAV and RAWDAT seek directly.
class DecodeCache {
public:
    explicit DecodeCache(std::size_t capacity = 2) : capacity_(capacity) {}

    std::shared_ptr<const flac::DecodeResult> flac_file(const std::string& path) {
        auto it = entries_.find(path);
        if (it != entries_.end()) {
            it->second.tick = ++clock_;
            return it->second.data;
        }
        auto decoded = std::make_shared<flac::DecodeResult>(flac::decode_all(path));
        if (entries_.size() >= capacity_) {
            auto oldest = entries_.begin();
            for (auto e = entries_.begin(); e != entries_.end(); ++e)
                if (e->second.tick < oldest->second.tick) oldest = e;
            entries_.erase(oldest);
        }
        entries_[path] = {decoded, ++clock_};
        return decoded;
    }

private:
    struct Entry {
        std::shared_ptr<const flac::DecodeResult> data;
        std::uint64_t tick = 0;
    };
    std::size_t capacity_;
    std::uint64_t clock_ = 0;
    std::unordered_map<std::string, Entry> entries_;
};

// Decodes frames [begin, end) of one channel from any supported container.
// Missing tails come back short with `truncated` set; opening or container
// failures throw (IoError / CorruptContainerError).
inline DecodedRange decode_audio_range(const std::string& path, FormatTag format,
                                       std::int64_t begin, std::int64_t end, int channel,
                                       DecodeCache* cache = nullptr) {
    DecodedRange out;
    switch (format) {
        case FormatTag::WAV: {
            wav::RangeResult r = wav::decode_range(path, begin, end, channel);
            out.samples = std::move(r.samples);
            out.truncated = r.truncated;
            break;
        }
        case FormatTag::FLAC: {
            std::shared_ptr<const flac::DecodeResult> dec;
            DecodeCache local(1);
            dec = (cache ? *cache : local).flac_file(path);
            if (channel < 0 || channel >= dec->info.channels)
                throw OutOfRangeError(path + ": channel out of range");
            const auto& ch = dec->channels[static_cast<std::size_t>(channel)];
            std::int64_t avail = static_cast<std::int64_t>(ch.size());
            std::int64_t stop = end < avail ? end : avail;
            if (begin < stop)
                out.samples.assign(ch.begin() + begin, ch.begin() + stop);
            out.truncated = stop < end || dec->truncated;
            break;
        }
        case FormatTag::RAWDAT: {
            rawdat::Sidecar sc = rawdat::read_sidecar(path);
            rawdat::RangeResult r = rawdat::decode_range(path, sc, begin, end, channel);
            out.samples = std::move(r.samples);
            out.truncated = r.truncated;
            break;
        }
    }
    return out;
}

}  // namespace soundmine
