#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "soundmine/detector.hpp"
#include "soundmine/detectors/curve.hpp"
#include "soundmine/stft.hpp"

namespace soundmine {

struct BandEnergyParms {
    double low_freq = 0;
    double high_freq = 0;
    double threshold_db = 10.0;  // dB over the running noise floor
    double min_duration_s = 0.5;
    double hangover_s = 0.3;
    int noise_window_frames = 61;
};

// Mean noise-whitened power in the band, in dB. 0 dB means "at the noise
// floor"; values are clamped finite at -100 dB for silent frames.
inline std::vector<double> band_energy_curve(const Spectrogram& spec,
                                             const BandEnergyParms& parms) {
    int lo = 0, hi = 0;
    if (!band_bins(spec, parms.low_freq, parms.high_freq, lo, hi))
        return std::vector<double>(static_cast<std::size_t>(spec.frames), -100.0);
    const int nbins = hi - lo + 1;
    std::vector<double> w =
        whiten_magnitudes(spec, lo, hi, parms.noise_window_frames, 50.0);
    std::vector<double> curve(static_cast<std::size_t>(spec.frames));
    for (int f = 0; f < spec.frames; ++f) {
        double sum = 0;
        const double* row = w.data() + static_cast<std::size_t>(f) * nbins;
        for (int b = 0; b < nbins; ++b) sum += row[b] * row[b];
        double mean = sum / nbins;
        curve[static_cast<std::size_t>(f)] = 10.0 * std::log10(std::max(mean, 1e-10));
    }
    return curve;
}

inline std::vector<RawDetection> band_energy_detect(const Spectrogram& spec,
                                                    const BandEnergyParms& parms) {
    DetectionCurve curve;
    curve.values = band_energy_curve(spec, parms);
    curve.threshold = parms.threshold_db;
    curve.min_duration_frames = min_duration_frames_for(parms.min_duration_s, spec);
    curve.hangover_frames = hangover_frames_for(parms.hangover_s, spec);

    std::vector<RawDetection> out;
    for (const FrameRun& run : group_detection_curve(curve)) {
        RawDetection d;
        d.begin_sample = frames_to_begin_sample(spec, run.first);
        d.end_sample = frames_to_end_sample(spec, run.last);
        d.low_freq = parms.low_freq;
        d.high_freq = parms.high_freq;
        d.score = run.peak_value;
        out.push_back(std::move(d));
    }
    return out;
}

class BandEnergyDetector : public Detector {
public:
    explicit BandEnergyDetector(const ValidatedParms& vp) {
        const ParmSet& p = vp.parms;
        nfft_ = static_cast<int>(p.get_int("nfft"));
        hop_ = static_cast<int>(p.get_int("hop"));
        parms_.low_freq = p.get_float("low_freq");
        parms_.high_freq = p.get_float("high_freq");
        parms_.threshold_db = p.get_float("threshold_db");
        parms_.min_duration_s = p.get_float("min_duration_s");
        parms_.hangover_s = p.get_float("hangover_s");
        parms_.noise_window_frames = static_cast<int>(p.get_int("noise_window_frames"));
    }

    std::vector<RawDetection> run(std::span<const float> samples, int sample_rate) override {
        if (static_cast<std::int64_t>(samples.size()) < nfft_) return {};
        Spectrogram spec = stft(samples, nfft_, hop_, sample_rate);
        return band_energy_detect(spec, parms_);
    }

    std::int64_t min_analysis_samples() const override { return nfft_; }

private:
    int nfft_ = 256;
    int hop_ = 128;
    BandEnergyParms parms_;
};

namespace detail {

inline void spectral_cross_checks(const ParmSet& p, int sample_rate,
                                  std::vector<std::string>& violations) {
    auto nfft = p.get_int("nfft");
    auto hop = p.get_int("hop");
    if ((nfft & (nfft - 1)) != 0)
        violations.push_back("nfft = " + std::to_string(nfft) + " is not a power of two");
    if (hop > nfft)
        violations.push_back("hop = " + std::to_string(hop) + " exceeds nfft = " +
                             std::to_string(nfft));
    double low = p.get_float("low_freq");
    double high = p.get_float("high_freq");
    double nyquist = sample_rate / 2.0;
    if (low > high)
        violations.push_back("low_freq " + to_string(*p.find("low_freq")) +
                             " above high_freq " + to_string(*p.find("high_freq")));
    if (high > nyquist) {
        std::ostringstream os;
        os << "high_freq " << high << " exceeds Nyquist " << nyquist;
        violations.push_back(os.str());
    }
    if (violations.empty() && nfft > 0) {
        double df = static_cast<double>(sample_rate) / static_cast<double>(nfft);
        int lo = static_cast<int>(std::ceil(low / df - 1e-9));
        int hi = static_cast<int>(std::floor(high / df + 1e-9));
        if (std::max(lo, 0) > std::min<long long>(hi, nfft / 2))
            violations.push_back("band [" + std::to_string(low) + ", " +
                                 std::to_string(high) + "] Hz holds no spectrogram bin");
    }
}

}  // namespace detail

inline void register_band_energy(DetectorRegistry& registry) {
    DetectorDescriptor desc;
    desc.detector_id = "band_energy";
    desc.display_name = "Band energy threshold detector";
    desc.max_event_duration_s = 30.0;
    desc.requires_contiguous_valid_data = true;
    desc.min_sample_rate_hz = 16.0;
    desc.required_keys = {
        {"nfft", ParmType::Int, 16, 65536, ParmValue(std::int64_t(256))},
        {"hop", ParmType::Int, 1, 65536, ParmValue(std::int64_t(128))},
        {"low_freq", ParmType::Float, 0, 1e6, std::nullopt},
        {"high_freq", ParmType::Float, 0, 1e6, std::nullopt},
        {"threshold_db", ParmType::Float, 1e-6, 200, ParmValue(10.0)},
        {"min_duration_s", ParmType::Float, 0, 3600, ParmValue(0.5)},
        {"hangover_s", ParmType::Float, 0, 60, ParmValue(0.3)},
        {"noise_window_frames", ParmType::Int, 3, 99999, ParmValue(std::int64_t(61))},
        {"name", ParmType::String, 0, 0, ParmValue(std::string())},
    };
    desc.cross_checks = detail::spectral_cross_checks;
    registry.add(std::move(desc), [](const ValidatedParms& vp) {
        return std::make_unique<BandEnergyDetector>(vp);
    });
}

}  // namespace soundmine
