#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "soundmine/errors.hpp"

namespace soundmine {

// Magnitude spectrogram. Frame f covers samples
// [start_sample + f*hop, start_sample + f*hop + nfft).
struct Spectrogram {
    std::vector<double> magnitudes;  // frames * bins, row-major
    int frames = 0;
    int bins = 0;  // nfft/2 + 1
    int frame_hop = 0;
    int nfft = 0;
    int sample_rate = 0;
    std::int64_t start_sample = 0;

    double at(int frame, int bin) const {
        return magnitudes[static_cast<std::size_t>(frame) * bins + bin];
    }
    double bin_hz() const { return static_cast<double>(sample_rate) / nfft; }
};

namespace detail {

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline std::vector<double> hann_window(int n) {
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        w[static_cast<std::size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
    return w;
}

}  // namespace detail

// Hann-windowed short-time transform magnitudes. The trailing partial frame
// is dropped; fewer than nfft samples is an error.
inline Spectrogram stft(std::span<const float> samples, int nfft, int hop,
                        int sample_rate, std::int64_t start_sample = 0) {
    if (!detail::is_power_of_two(nfft))
        throw std::invalid_argument("stft: nfft must be a power of two");
    if (hop <= 0 || hop > nfft)
        throw std::invalid_argument("stft: hop must satisfy 0 < hop <= nfft");
    if (static_cast<std::int64_t>(samples.size()) < nfft)
        throw TooShortError("stft: need at least nfft samples, got " +
                            std::to_string(samples.size()));

    Spectrogram spec;
    spec.nfft = nfft;
    spec.frame_hop = hop;
    spec.sample_rate = sample_rate;
    spec.start_sample = start_sample;
    spec.bins = nfft / 2 + 1;
    spec.frames = static_cast<int>((samples.size() - static_cast<std::size_t>(nfft)) /
                                   static_cast<std::size_t>(hop)) +
                  1;
    spec.magnitudes.resize(static_cast<std::size_t>(spec.frames) * spec.bins);

    const std::vector<double> window = detail::hann_window(nfft);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(nfft));
    for (int f = 0; f < spec.frames; ++f) {
        const std::size_t off = static_cast<std::size_t>(f) * hop;
        for (int i = 0; i < nfft; ++i)
            buf[static_cast<std::size_t>(i)] = {
                window[static_cast<std::size_t>(i)] * samples[off + i], 0.0};
        detail::fft_radix2(buf);
        double* row = spec.magnitudes.data() + static_cast<std::size_t>(f) * spec.bins;
        for (int k = 0; k < spec.bins; ++k) row[k] = std::abs(buf[static_cast<std::size_t>(k)]);
    }
    return spec;
}

}  // namespace soundmine
