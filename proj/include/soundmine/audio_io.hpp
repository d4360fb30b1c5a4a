#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "soundmine/archive.hpp"
#include "soundmine/codec/codec.hpp"
#include "soundmine/errors.hpp"

namespace soundmine {

// A slab of the virtual timeline. Samples where validity is false are
// exactly 0.0 (padded gaps or failed decodes).
struct SampleBlock {
    int stream_id = 0;
    std::int64_t start_sample = 0;
    std::vector<float> samples;
    std::vector<bool> validity;
    int sample_rate = 0;

    std::int64_t end_sample() const {
        return start_sample + static_cast<std::int64_t>(samples.size());
    }
};

// One fault encountered while serving a block. Faulted regions are served as
// invalid zeros rather than aborting the read.
struct ReadFault {
    enum class Kind { Io, Truncated, Clamped };
    Kind kind = Kind::Io;
    std::string message;
};

struct ReadResult {
    SampleBlock block;
    std::vector<ReadFault> faults;

    bool has_io_fault() const {
        for (const auto& f : faults)
            if (f.kind == ReadFault::Kind::Io || f.kind == ReadFault::Kind::Truncated)
                return true;
        return false;
    }
};

// Decodes frames [begin, end) of `span` for its stream's channel.
inline std::vector<float> decode_file(const SpanPlacement& span, std::int64_t begin,
                                      std::int64_t end, int channel,
                                      DecodeCache* cache = nullptr,
                                      bool* truncated = nullptr) {
    DecodedRange r = decode_audio_range(span.path, span.format_tag, begin, end, channel, cache);
    if (truncated) *truncated = r.truncated;
    return std::move(r.samples);
}

// Serves [start_sample, start_sample + length) of a stream: file regions
// decoded with validity=true, gaps zero-filled with validity=false, decode
// failures degraded to invalid zeros with a fault entry. Ranges past the
// stream end are clamped (noted as a fault).
inline ReadResult read_block(const ArchiveMap& map, int stream_id,
                             std::int64_t start_sample, std::int64_t length,
                             DecodeCache* cache = nullptr) {
    if (length <= 0) throw std::invalid_argument("read_block: length must be > 0");
    const ChannelStream& stream = map.stream(stream_id);
    if (start_sample < 0 || start_sample >= stream.total_virtual_samples)
        throw OutOfRangeError("read_block: start sample " + std::to_string(start_sample) +
                              " outside stream");

    ReadResult res;
    std::int64_t end = start_sample + length;
    if (end > stream.total_virtual_samples) {
        end = stream.total_virtual_samples;
        res.faults.push_back({ReadFault::Kind::Clamped,
                              "range clamped to stream end at sample " + std::to_string(end)});
    }

    SampleBlock& block = res.block;
    block.stream_id = stream_id;
    block.start_sample = start_sample;
    block.sample_rate = stream.sample_rate;
    const std::size_t n = static_cast<std::size_t>(end - start_sample);
    block.samples.assign(n, 0.0f);
    block.validity.assign(n, false);

    // Walk spans intersecting the range; everything not covered stays invalid.
    for (const SpanPlacement& sp : stream.spans) {
        if (sp.virtual_end() <= start_sample) continue;
        if (sp.virtual_start >= end) break;
        std::int64_t lo = std::max(sp.virtual_start, start_sample);
        std::int64_t hi = std::min(sp.virtual_end(), end);
        std::int64_t file_begin = sp.file_offset + (lo - sp.virtual_start);
        std::int64_t file_end = file_begin + (hi - lo);

        std::vector<float> decoded;
        bool truncated = false;
        try {
            decoded = decode_file(sp, file_begin, file_end, stream.channel, cache, &truncated);
        } catch (const std::exception& e) {
            res.faults.push_back({ReadFault::Kind::Io, sp.path + ": " + e.what()});
            continue;
        }
        if (truncated || static_cast<std::int64_t>(decoded.size()) < hi - lo)
            res.faults.push_back({ReadFault::Kind::Truncated,
                                  sp.path + ": decoded " + std::to_string(decoded.size()) +
                                      " of " + std::to_string(hi - lo) + " frames"});
        std::size_t base = static_cast<std::size_t>(lo - start_sample);
        for (std::size_t i = 0; i < decoded.size() &&
                                i < static_cast<std::size_t>(hi - lo); ++i) {
            block.samples[base + i] = decoded[i];
            block.validity[base + i] = true;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Integrity checking

struct IntegrityThresholds {
    double min_valid_fraction = 0.5;
    double clip_fraction = 0.01;
};

enum class IntegrityVerdict { PASS, DEGRADED, FAIL };

inline const char* verdict_name(IntegrityVerdict v) {
    switch (v) {
        case IntegrityVerdict::PASS: return "PASS";
        case IntegrityVerdict::DEGRADED: return "DEGRADED";
        default: return "FAIL";
    }
}

struct IntegrityReport {
    double valid_fraction = 0;
    std::int64_t nonfinite_count = 0;
    std::int64_t clipped_count = 0;
    bool all_zero = false;
    IntegrityVerdict verdict = IntegrityVerdict::PASS;
};

// Pure function of the block contents and thresholds. FAIL when too little
// valid data or any non-finite sample; DEGRADED when too many valid samples
// sit at full scale.
inline IntegrityReport check_integrity(const SampleBlock& block,
                                       const IntegrityThresholds& thresholds = {}) {
    IntegrityReport rep;
    std::int64_t valid = 0;
    bool any_nonzero = false;
    for (std::size_t i = 0; i < block.samples.size(); ++i) {
        float s = block.samples[i];
        if (s != 0.0f) any_nonzero = true;
        if (!block.validity[i]) continue;
        ++valid;
        if (!std::isfinite(s))
            ++rep.nonfinite_count;
        else if (std::fabs(s) >= 1.0f)
            ++rep.clipped_count;
    }
    rep.all_zero = !any_nonzero;
    rep.valid_fraction = block.samples.empty()
                             ? 0.0
                             : static_cast<double>(valid) /
                                   static_cast<double>(block.samples.size());
    if (rep.valid_fraction < thresholds.min_valid_fraction || rep.nonfinite_count > 0)
        rep.verdict = IntegrityVerdict::FAIL;
    else if (valid > 0 &&
             static_cast<double>(rep.clipped_count) / static_cast<double>(valid) >
                 thresholds.clip_fraction)
        rep.verdict = IntegrityVerdict::DEGRADED;
    else
        rep.verdict = IntegrityVerdict::PASS;
    return rep;
}

}  // namespace soundmine
