#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "soundmine/detector.hpp"
#include "soundmine/detectors/band_energy.hpp"
#include "soundmine/detectors/curve.hpp"
#include "soundmine/stft.hpp"

namespace soundmine {

struct PowerLawParms {
    double gamma = 2.5;
    int nu_frames = 61;  // noise-estimate window
    double threshold = 0;
    double whiten_percentile = 50.0;
    double min_duration_s = 0.5;
    double hangover_s = 0.3;
    double low_freq = 0;
    double high_freq = 0;
};

// Per-frame statistic: sum over band bins of (whitened magnitude)^(2*gamma).
// gamma = 1 reduces to whitened band energy; larger gamma favors energy
// concentrated in few bins over the same energy spread across many.
inline std::vector<double> power_law_curve(const Spectrogram& spec,
                                           const PowerLawParms& parms) {
    int lo = 0, hi = 0;
    if (!band_bins(spec, parms.low_freq, parms.high_freq, lo, hi))
        return std::vector<double>(static_cast<std::size_t>(spec.frames), 0.0);
    const int nbins = hi - lo + 1;
    std::vector<double> w = whiten_magnitudes(spec, lo, hi, parms.nu_frames,
                                              parms.whiten_percentile);
    std::vector<double> curve(static_cast<std::size_t>(spec.frames));
    const double exponent = 2.0 * parms.gamma;
    for (int f = 0; f < spec.frames; ++f) {
        double sum = 0;
        const double* row = w.data() + static_cast<std::size_t>(f) * nbins;
        for (int b = 0; b < nbins; ++b) sum += std::pow(row[b], exponent);
        curve[static_cast<std::size_t>(f)] = sum;
    }
    return curve;
}

namespace detail {

// Contiguous bin range around the strongest bin that carries at least half
// of the peak frame's statistic.
inline void dominant_bin_range(const std::vector<double>& contributions, int& lo, int& hi) {
    const int n = static_cast<int>(contributions.size());
    double total = 0;
    int peak = 0;
    for (int b = 0; b < n; ++b) {
        total += contributions[static_cast<std::size_t>(b)];
        if (contributions[static_cast<std::size_t>(b)] >
            contributions[static_cast<std::size_t>(peak)])
            peak = b;
    }
    lo = hi = peak;
    double cum = contributions[static_cast<std::size_t>(peak)];
    while (cum < 0.5 * total && (lo > 0 || hi < n - 1)) {
        double left = lo > 0 ? contributions[static_cast<std::size_t>(lo - 1)] : -1;
        double right = hi < n - 1 ? contributions[static_cast<std::size_t>(hi + 1)] : -1;
        if (right > left) {
            ++hi;
            cum += right;
        } else {
            --lo;
            cum += left;
        }
    }
}

}  // namespace detail

inline std::vector<RawDetection> power_law_detect(const Spectrogram& spec,
                                                  const PowerLawParms& parms) {
    int band_lo = 0, band_hi = 0;
    if (!band_bins(spec, parms.low_freq, parms.high_freq, band_lo, band_hi)) return {};
    const int nbins = band_hi - band_lo + 1;
    std::vector<double> w = whiten_magnitudes(spec, band_lo, band_hi, parms.nu_frames,
                                              parms.whiten_percentile);

    DetectionCurve curve;
    curve.values.resize(static_cast<std::size_t>(spec.frames));
    const double exponent = 2.0 * parms.gamma;
    for (int f = 0; f < spec.frames; ++f) {
        double sum = 0;
        const double* row = w.data() + static_cast<std::size_t>(f) * nbins;
        for (int b = 0; b < nbins; ++b) sum += std::pow(row[b], exponent);
        curve.values[static_cast<std::size_t>(f)] = sum;
    }
    curve.threshold = parms.threshold;
    curve.min_duration_frames = min_duration_frames_for(parms.min_duration_s, spec);
    curve.hangover_frames = hangover_frames_for(parms.hangover_s, spec);

    std::vector<RawDetection> out;
    const double nyquist = spec.sample_rate / 2.0;
    for (const FrameRun& run : group_detection_curve(curve)) {
        std::vector<double> contributions(static_cast<std::size_t>(nbins));
        const double* row = w.data() + static_cast<std::size_t>(run.peak) * nbins;
        for (int b = 0; b < nbins; ++b)
            contributions[static_cast<std::size_t>(b)] = std::pow(row[b], exponent);
        int lo = 0, hi = 0;
        detail::dominant_bin_range(contributions, lo, hi);

        RawDetection d;
        d.begin_sample = frames_to_begin_sample(spec, run.first);
        d.end_sample = frames_to_end_sample(spec, run.last);
        d.low_freq = (band_lo + lo) * spec.bin_hz();
        d.high_freq = std::min((band_lo + hi + 1) * spec.bin_hz(), nyquist);
        d.score = run.peak_value;
        out.push_back(std::move(d));
    }
    return out;
}

class PowerLawDetector : public Detector {
public:
    explicit PowerLawDetector(const ValidatedParms& vp) {
        const ParmSet& p = vp.parms;
        nfft_ = static_cast<int>(p.get_int("nfft"));
        hop_ = static_cast<int>(p.get_int("hop"));
        parms_.gamma = p.get_float("gamma");
        parms_.nu_frames = static_cast<int>(p.get_int("nu_frames"));
        parms_.threshold = p.get_float("threshold");
        parms_.whiten_percentile = p.get_float("whiten_percentile");
        parms_.min_duration_s = p.get_float("min_duration_s");
        parms_.hangover_s = p.get_float("hangover_s");
        parms_.low_freq = p.get_float("low_freq");
        parms_.high_freq = p.get_float("high_freq");
    }

    std::vector<RawDetection> run(std::span<const float> samples, int sample_rate) override {
        if (static_cast<std::int64_t>(samples.size()) < nfft_) return {};
        Spectrogram spec = stft(samples, nfft_, hop_, sample_rate);
        return power_law_detect(spec, parms_);
    }

    std::int64_t min_analysis_samples() const override { return nfft_; }

private:
    int nfft_ = 256;
    int hop_ = 128;
    PowerLawParms parms_;
};

inline void register_power_law(DetectorRegistry& registry) {
    DetectorDescriptor desc;
    desc.detector_id = "power_law";
    desc.display_name = "Power-law statistic detector";
    desc.max_event_duration_s = 30.0;
    desc.requires_contiguous_valid_data = true;
    desc.min_sample_rate_hz = 16.0;
    desc.required_keys = {
        {"nfft", ParmType::Int, 16, 65536, ParmValue(std::int64_t(256))},
        {"hop", ParmType::Int, 1, 65536, ParmValue(std::int64_t(128))},
        {"gamma", ParmType::Float, 1e-6, 10, ParmValue(2.5)},
        {"nu_frames", ParmType::Int, 3, 99999, ParmValue(std::int64_t(61))},
        {"threshold", ParmType::Float, 1e-9, 1e15, std::nullopt},
        {"whiten_percentile", ParmType::Float, 1e-3, 99.999, ParmValue(50.0)},
        {"min_duration_s", ParmType::Float, 0, 3600, ParmValue(0.5)},
        {"hangover_s", ParmType::Float, 0, 60, ParmValue(0.3)},
        {"low_freq", ParmType::Float, 0, 1e6, std::nullopt},
        {"high_freq", ParmType::Float, 0, 1e6, std::nullopt},
        {"name", ParmType::String, 0, 0, ParmValue(std::string())},
    };
    desc.cross_checks = detail::spectral_cross_checks;
    registry.add(std::move(desc), [](const ValidatedParms& vp) {
        return std::make_unique<PowerLawDetector>(vp);
    });
}

// Registry holding the built-in reference detectors.
inline DetectorRegistry make_builtin_registry() {
    DetectorRegistry registry;
    register_band_energy(registry);
    register_power_law(registry);
    return registry;
}

}  // namespace soundmine
