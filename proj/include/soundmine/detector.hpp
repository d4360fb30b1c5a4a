#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "soundmine/audio_io.hpp"
#include "soundmine/parms.hpp"

namespace soundmine {

// One detected acoustic event in virtual-timeline sample coordinates.
struct RawDetection {
    std::int64_t begin_sample = 0;
    std::int64_t end_sample = 0;  // exclusive; > begin_sample
    double low_freq = 0;          // Hz
    double high_freq = 0;
    double score = 0;  // unitless, higher = stronger
    std::string detector_id;
};

// Declared requirement for one parm-file key.
struct ParmRequirement {
    std::string key;
    ParmType type = ParmType::Float;
    double min_value = 0;  // numeric types only
    double max_value = 0;
    std::optional<ParmValue> default_value;  // absent => key must be present
};

// What a detection algorithm needs from the engine; owned by the wrapper so
// the algorithm itself stays untouched.
struct DetectorDescriptor {
    std::string detector_id;
    std::string display_name;
    std::vector<ParmRequirement> required_keys;
    double max_event_duration_s = 30.0;
    bool requires_contiguous_valid_data = true;
    double min_sample_rate_hz = 1.0;
    // Cross-key checks beyond per-key type/range (e.g. hop <= nfft).
    std::function<void(const ParmSet&, int sample_rate, std::vector<std::string>&)>
        cross_checks;
};

// A parsed ParmSet checked against a descriptor for a given stream rate,
// with declared defaults filled in.
struct ValidatedParms {
    ParmSet parms;  // validated == true
    int sample_rate = 0;
};

// Checks presence, type, range, and cross-key consistency. Returns every
// violation at once; on success fills defaults and marks the set validated.
inline std::vector<std::string> validate_parms(const ParmSet& parms,
                                               const DetectorDescriptor& desc,
                                               int sample_rate,
                                               ValidatedParms* out = nullptr) {
    std::vector<std::string> violations;
    ParmSet filled = parms;

    if (sample_rate < desc.min_sample_rate_hz)
        violations.push_back("stream sample rate " + std::to_string(sample_rate) +
                             " Hz below detector minimum " +
                             std::to_string(desc.min_sample_rate_hz) + " Hz");

    for (const ParmRequirement& req : desc.required_keys) {
        const ParmValue* v = parms.find(req.key);
        if (!v) {
            if (req.default_value) {
                filled.set(req.key, *req.default_value);
                continue;
            }
            violations.push_back("missing required key '" + req.key + "'");
            continue;
        }
        ParmType got = type_of(*v);
        bool type_ok = got == req.type ||
                       (req.type == ParmType::Float && got == ParmType::Int);
        if (!type_ok) {
            violations.push_back("key '" + req.key + "' has type " + parm_type_name(got) +
                                 ", expected " + parm_type_name(req.type));
            continue;
        }
        if (req.type == ParmType::Int || req.type == ParmType::Float) {
            double num = got == ParmType::Int
                             ? static_cast<double>(std::get<std::int64_t>(*v))
                             : std::get<double>(*v);
            if (num < req.min_value || num > req.max_value)
                violations.push_back("key '" + req.key + "' = " + to_string(*v) +
                                     " outside [" + std::to_string(req.min_value) + ", " +
                                     std::to_string(req.max_value) + "]");
        }
    }

    // Unknown keys are configuration mistakes; surface them all.
    for (const auto& [key, value] : parms.entries()) {
        bool known = false;
        for (const ParmRequirement& req : desc.required_keys)
            if (req.key == key) {
                known = true;
                break;
            }
        if (!known) violations.push_back("unknown key '" + key + "'");
    }

    if (violations.empty() && desc.cross_checks)
        desc.cross_checks(filled, sample_rate, violations);

    if (violations.empty() && out) {
        filled.detector_id = desc.detector_id;
        filled.validated = true;
        out->parms = std::move(filled);
        out->sample_rate = sample_rate;
    }
    return violations;
}

// The algorithm side of the plugin seam. `run` sees one contiguous buffer of
// real samples and reports detections relative to the buffer start; the
// wrapper owns placement on the virtual timeline.
class Detector {
public:
    virtual ~Detector() = default;
    virtual std::vector<RawDetection> run(std::span<const float> samples,
                                          int sample_rate) = 0;
    // Segments shorter than this are skipped by the wrapper.
    virtual std::int64_t min_analysis_samples() const = 0;
};

struct DetectorEntry {
    DetectorDescriptor descriptor;
    std::function<std::unique_ptr<Detector>(const ValidatedParms&)> factory;
};

// In-process detector registry, keyed by detector_id.
class DetectorRegistry {
public:
    void add(DetectorDescriptor desc,
             std::function<std::unique_ptr<Detector>(const ValidatedParms&)> factory) {
        std::string id = desc.detector_id;
        entries_[id] = DetectorEntry{std::move(desc), std::move(factory)};
    }

    bool contains(const std::string& id) const { return entries_.count(id) > 0; }

    const DetectorEntry& entry(const std::string& id) const {
        auto it = entries_.find(id);
        if (it == entries_.end())
            throw std::invalid_argument("no detector registered as '" + id + "'");
        return it->second;
    }

    const DetectorDescriptor& descriptor(const std::string& id) const {
        return entry(id).descriptor;
    }

    std::vector<std::string> ids() const {
        std::vector<std::string> out;
        for (const auto& [id, e] : entries_) out.push_back(id);
        return out;
    }

private:
    std::map<std::string, DetectorEntry> entries_;
};

// Everything a worker lane needs to mint its own detector instance.
struct DetectorHandle {
    const DetectorEntry* entry = nullptr;
    ValidatedParms parms;

    std::unique_ptr<Detector> make() const { return entry->factory(parms); }
    const DetectorDescriptor& descriptor() const { return entry->descriptor; }
};

inline DetectorHandle make_detector_handle(const DetectorRegistry& registry,
                                           const std::string& id,
                                           ValidatedParms parms) {
    DetectorHandle h;
    h.entry = &registry.entry(id);
    h.parms = std::move(parms);
    return h;
}

namespace detail {

// Maximal runs of validity==true, as [begin, end) offsets into the block.
inline std::vector<std::pair<std::int64_t, std::int64_t>> valid_segments(
    const SampleBlock& block) {
    std::vector<std::pair<std::int64_t, std::int64_t>> segs;
    const std::int64_t n = static_cast<std::int64_t>(block.samples.size());
    std::int64_t i = 0;
    while (i < n) {
        while (i < n && !block.validity[static_cast<std::size_t>(i)]) ++i;
        std::int64_t begin = i;
        while (i < n && block.validity[static_cast<std::size_t>(i)]) ++i;
        if (i > begin) segs.emplace_back(begin, i);
    }
    return segs;
}

}  // namespace detail

// Runs the algorithm over a block. Detectors that require contiguous valid
// data are invoked once per maximal valid segment and never see a padded
// sample; detections come back in virtual-timeline coordinates.
inline std::vector<RawDetection> run_detector(Detector& detector,
                                              const DetectorDescriptor& desc,
                                              const SampleBlock& block) {
    std::vector<std::pair<std::int64_t, std::int64_t>> segments;
    if (desc.requires_contiguous_valid_data) {
        segments = detail::valid_segments(block);
    } else {
        if (!block.samples.empty())
            segments.emplace_back(0, static_cast<std::int64_t>(block.samples.size()));
    }

    std::vector<RawDetection> out;
    for (auto [begin, end] : segments) {
        if (end - begin < detector.min_analysis_samples()) continue;
        std::span<const float> seg(block.samples.data() + begin,
                                   static_cast<std::size_t>(end - begin));
        std::vector<RawDetection> dets = detector.run(seg, block.sample_rate);
        for (RawDetection& d : dets) {
            d.begin_sample += block.start_sample + begin;
            d.end_sample += block.start_sample + begin;
            d.detector_id = desc.detector_id;
            out.push_back(std::move(d));
        }
    }
    return out;
}

}  // namespace soundmine
