#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "soundmine/stft.hpp"

namespace soundmine {

// Per-frame detection statistic plus the grouping rules applied to it.
struct DetectionCurve {
    std::vector<double> values;
    double threshold = 0;  // > 0
    int min_duration_frames = 1;
    int hangover_frames = 0;
};

struct FrameRun {
    int first = 0;
    int last = 0;  // inclusive
    int peak = 0;
    double peak_value = 0;
};

// Frames above threshold, grouped: runs separated by at most
// hangover_frames of quiet merge, then short groups are dropped.
inline std::vector<FrameRun> group_detection_curve(const DetectionCurve& curve) {
    std::vector<FrameRun> runs;
    const int n = static_cast<int>(curve.values.size());
    int f = 0;
    while (f < n) {
        while (f < n && !(curve.values[static_cast<std::size_t>(f)] > curve.threshold)) ++f;
        if (f >= n) break;
        FrameRun run;
        run.first = run.last = run.peak = f;
        run.peak_value = curve.values[static_cast<std::size_t>(f)];
        while (f < n && curve.values[static_cast<std::size_t>(f)] > curve.threshold) {
            if (curve.values[static_cast<std::size_t>(f)] > run.peak_value) {
                run.peak_value = curve.values[static_cast<std::size_t>(f)];
                run.peak = f;
            }
            run.last = f;
            ++f;
        }
        if (!runs.empty() && run.first - runs.back().last - 1 <= curve.hangover_frames) {
            FrameRun& prev = runs.back();
            prev.last = run.last;
            if (run.peak_value > prev.peak_value) {
                prev.peak_value = run.peak_value;
                prev.peak = run.peak;
            }
        } else {
            runs.push_back(run);
        }
    }
    std::vector<FrameRun> kept;
    for (const FrameRun& r : runs)
        if (r.last - r.first + 1 >= curve.min_duration_frames) kept.push_back(r);
    return kept;
}

namespace detail {

// Order-statistic percentile: the floor(p/100 * (n-1))-th smallest value.
// Scale-equivariant, which keeps whitened statistics amplitude-invariant.
inline double order_statistic(std::vector<double>& scratch, double percentile) {
    const std::size_t n = scratch.size();
    std::size_t k = static_cast<std::size_t>(
        std::floor(percentile / 100.0 * static_cast<double>(n - 1)));
    if (k >= n) k = n - 1;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                     scratch.end());
    return scratch[k];
}

}  // namespace detail

// Divides each bin's magnitudes by that bin's running percentile noise
// estimate over a centered window of `window_frames` frames (clamped at the
// edges). Returns frames x selected-bins, row-major.
inline std::vector<double> whiten_magnitudes(const Spectrogram& spec, int bin_lo,
                                             int bin_hi, int window_frames,
                                             double percentile) {
    const int frames = spec.frames;
    const int nbins = bin_hi - bin_lo + 1;
    std::vector<double> out(static_cast<std::size_t>(frames) * nbins);
    if (frames == 0 || nbins <= 0) return out;

    const int half = window_frames / 2;
    std::vector<double> column(static_cast<std::size_t>(frames));
    std::vector<double> scratch;
    constexpr double kFloor = 1e-30;  // keeps all-zero bins at 0 after division

    for (int b = 0; b < nbins; ++b) {
        for (int f = 0; f < frames; ++f)
            column[static_cast<std::size_t>(f)] = spec.at(f, bin_lo + b);
        for (int f = 0; f < frames; ++f) {
            int lo = std::max(0, f - half);
            int hi = std::min(frames - 1, f + half);
            scratch.assign(column.begin() + lo, column.begin() + hi + 1);
            double noise = detail::order_statistic(scratch, percentile);
            out[static_cast<std::size_t>(f) * nbins + b] =
                column[static_cast<std::size_t>(f)] / std::max(noise, kFloor);
        }
    }
    return out;
}

// Bin range [lo, hi] whose center frequencies fall inside [low_hz, high_hz].
// Returns false when the band holds no bin.
inline bool band_bins(const Spectrogram& spec, double low_hz, double high_hz, int& lo,
                      int& hi) {
    const double df = spec.bin_hz();
    lo = static_cast<int>(std::ceil(low_hz / df - 1e-9));
    hi = static_cast<int>(std::floor(high_hz / df + 1e-9));
    lo = std::max(lo, 0);
    hi = std::min(hi, spec.bins - 1);
    return lo <= hi;
}

// Frames covering [first, last] inclusive, as sample bounds on the
// spectrogram's timeline.
inline std::int64_t frames_to_begin_sample(const Spectrogram& spec, int first) {
    return spec.start_sample + static_cast<std::int64_t>(first) * spec.frame_hop;
}

inline std::int64_t frames_to_end_sample(const Spectrogram& spec, int last) {
    return spec.start_sample + static_cast<std::int64_t>(last) * spec.frame_hop + spec.nfft;
}

inline int min_duration_frames_for(double min_duration_s, const Spectrogram& spec) {
    double min_samples = min_duration_s * spec.sample_rate;
    if (min_samples <= spec.nfft) return 1;
    return static_cast<int>(std::ceil((min_samples - spec.nfft) / spec.frame_hop)) + 1;
}

inline int hangover_frames_for(double hangover_s, const Spectrogram& spec) {
    return static_cast<int>(std::llround(hangover_s * spec.sample_rate / spec.frame_hop));
}

}  // namespace soundmine
