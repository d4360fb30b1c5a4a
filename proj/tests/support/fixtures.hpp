#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "support/wav_writer.hpp"

namespace testsupport {

// Self-cleaning scratch directory per test.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path() / "soundmine_tests";
        std::filesystem::create_directories(base);
        static std::atomic<int> counter{0};
        path_ = base / (tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::vector<float> white_noise(std::size_t n, float sigma, std::uint32_t seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<float> dist(0.0f, sigma);
    std::vector<float> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

inline std::vector<float> tone(std::size_t n, double freq_hz, int sample_rate,
                               float amplitude, double phase = 0.0) {
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = amplitude * static_cast<float>(std::sin(
                                 2.0 * std::numbers::pi * freq_hz *
                                     static_cast<double>(i) / sample_rate +
                                 phase));
    return out;
}

inline void add_tone_burst(std::vector<float>& samples, std::size_t start,
                           std::size_t length, double freq_hz, int sample_rate,
                           float amplitude) {
    for (std::size_t i = 0; i < length && start + i < samples.size(); ++i)
        samples[start + i] += amplitude * static_cast<float>(std::sin(
                                  2.0 * std::numbers::pi * freq_hz *
                                  static_cast<double>(i) / sample_rate));
}

struct BurstTruth {
    std::int64_t begin_sample;
    std::int64_t end_sample;
};

// One WAV file of white noise with frame-aligned tone bursts at a known
// in-band SNR. 20 dB in-band SNR over [100, 400] Hz at sigma 0.05 needs
// amplitude sqrt(2 * 100 * sigma^2 * 300/1000) ~= 0.387.
struct BurstArchive {
    std::string wav_path;
    std::vector<BurstTruth> bursts;
    int sample_rate;
};

inline BurstArchive make_burst_archive(const TempDir& dir, const std::string& name,
                                       int sample_rate, double duration_s, int n_bursts,
                                       std::uint32_t seed, double tone_hz = 250.0,
                                       float noise_sigma = 0.05f,
                                       float tone_amplitude = 0.387f,
                                       std::int64_t align = 256,
                                       std::int64_t burst_len = 3072) {
    BurstArchive a;
    a.sample_rate = sample_rate;
    const auto total = static_cast<std::size_t>(duration_s * sample_rate);
    std::vector<float> samples = white_noise(total, noise_sigma, seed);

    // Evenly spaced, aligned starts with headroom at both ends.
    const std::int64_t usable = static_cast<std::int64_t>(total) - 2 * align * 20;
    for (int k = 0; k < n_bursts; ++k) {
        std::int64_t raw = align * 20 + (usable - burst_len) * (k + 1) / (n_bursts + 1);
        std::int64_t start = (raw / align) * align;
        add_tone_burst(samples, static_cast<std::size_t>(start),
                       static_cast<std::size_t>(burst_len), tone_hz, sample_rate,
                       tone_amplitude);
        a.bursts.push_back({start, start + burst_len});
    }
    a.wav_path = dir.file(name);
    write_wav_float_as_int16(a.wav_path, sample_rate, {samples});
    return a;
}

}  // namespace testsupport
