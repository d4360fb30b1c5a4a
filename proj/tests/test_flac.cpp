#include <gtest/gtest.h>

#include "soundmine/codec/flac.hpp"
#include "support/fixtures.hpp"
#include "support/flac_writer.hpp"

#include <filesystem>
#include <random>

using namespace soundmine;

namespace {

std::vector<std::int64_t> random_codes(std::size_t n, int bps, std::uint32_t seed) {
    std::mt19937 rng(seed);
    const std::int64_t lim = (std::int64_t(1) << (bps - 1)) - 1;
    std::uniform_int_distribution<std::int64_t> dist(-lim - 1, lim);
    std::vector<std::int64_t> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

void expect_exact(const std::vector<float>& decoded, const std::vector<std::int64_t>& codes,
                  int bps) {
    ASSERT_EQ(decoded.size(), codes.size());
    const double scale = static_cast<double>(std::int64_t(1) << (bps - 1));
    for (std::size_t i = 0; i < codes.size(); ++i) {
        double expected = static_cast<double>(codes[i]) / scale;
        ASSERT_EQ(static_cast<double>(decoded[i]), expected) << "sample " << i;
    }
}

}  // namespace

TEST(FlacDecode, MonoWhiteNoiseLosslessRoundTrip) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("mono.flac");
    std::vector<std::int64_t> codes = random_codes(10000, 16, 7);
    testsupport::flacenc::write_flac(path, 2000, {codes}, 16);

    flac::DecodeResult r = flac::decode_all(path);
    EXPECT_FALSE(r.truncated) << r.fault;
    EXPECT_EQ(r.info.sample_rate, 2000);
    EXPECT_EQ(r.info.channels, 1);
    EXPECT_EQ(r.info.bits_per_sample, 16);
    EXPECT_EQ(r.info.total_samples, 10000);
    ASSERT_EQ(r.channels.size(), 1u);
    expect_exact(r.channels[0], codes, 16);
}

TEST(FlacDecode, StereoAllChannelAssignmentsLossless) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("stereo.flac");
    // At least 8 frames so the writer cycles every stereo assignment twice.
    std::vector<std::int64_t> left = random_codes(8 * 512, 16, 11);
    std::vector<std::int64_t> right = random_codes(8 * 512, 16, 13);
    testsupport::flacenc::EncodeOptions opt;
    opt.block_size = 512;
    testsupport::flacenc::write_flac(path, 8000, {left, right}, 16, opt);

    flac::DecodeResult r = flac::decode_all(path);
    EXPECT_FALSE(r.truncated) << r.fault;
    ASSERT_EQ(r.channels.size(), 2u);
    expect_exact(r.channels[0], left, 16);
    expect_exact(r.channels[1], right, 16);
}

TEST(FlacDecode, ConstantAndSmoothSectionsLossless) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("smooth.flac");
    // Smooth ramps make fixed-order-2 residuals small; constant tail
    // exercises the CONSTANT subframe.
    std::vector<std::int64_t> codes;
    for (int i = 0; i < 3000; ++i) codes.push_back((i * i) % 5000 - 2500);
    for (int i = 0; i < 1100; ++i) codes.push_back(777);
    testsupport::flacenc::write_flac(path, 4000, {codes}, 16);

    flac::DecodeResult r = flac::decode_all(path);
    EXPECT_FALSE(r.truncated) << r.fault;
    expect_exact(r.channels[0], codes, 16);
}

TEST(FlacDecode, WastedBitsSubframe) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("wasted.flac");
    std::vector<std::int64_t> codes = random_codes(2048, 16, 17);
    for (auto& c : codes) c &= ~std::int64_t(1);  // force LSB 0
    testsupport::flacenc::EncodeOptions opt;
    opt.use_wasted_bits = true;
    testsupport::flacenc::write_flac(path, 4000, {codes}, 16, opt);

    flac::DecodeResult r = flac::decode_all(path);
    EXPECT_FALSE(r.truncated) << r.fault;
    expect_exact(r.channels[0], codes, 16);
}

TEST(FlacDecode, EightBitSamples) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("w8.flac");
    std::vector<std::int64_t> codes = random_codes(1500, 8, 19);
    testsupport::flacenc::write_flac(path, 1000, {codes}, 8);

    flac::DecodeResult r = flac::decode_all(path);
    EXPECT_FALSE(r.truncated) << r.fault;
    EXPECT_EQ(r.info.bits_per_sample, 8);
    expect_exact(r.channels[0], codes, 8);
}

TEST(FlacDecode, TruncatedStreamKeepsPrefix) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("trunc.flac");
    std::vector<std::int64_t> codes = random_codes(4096, 16, 23);
    testsupport::flacenc::EncodeOptions opt;
    opt.block_size = 1024;
    testsupport::flacenc::write_flac(path, 2000, {codes}, 16, opt);

    std::filesystem::resize_file(path, std::filesystem::file_size(path) / 2);

    flac::DecodeResult r = flac::decode_all(path);
    EXPECT_TRUE(r.truncated);
    ASSERT_FALSE(r.channels[0].empty());
    ASSERT_EQ(r.channels[0].size() % 1024, 0u);  // whole frames only
    std::vector<std::int64_t> prefix(codes.begin(),
                                     codes.begin() + static_cast<std::ptrdiff_t>(
                                                         r.channels[0].size()));
    expect_exact(r.channels[0], prefix, 16);
}

TEST(FlacDecode, CorruptMagicThrows) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("bad.flac");
    {
        std::ofstream out(path, std::ios::binary);
        out << "fLaX and then a lot of padding to get past the size check ......";
    }
    EXPECT_THROW(flac::decode_all(path), CorruptContainerError);
    EXPECT_THROW(flac::probe(path), CorruptContainerError);
}

TEST(FlacDecode, ProbeReadsStreamInfo) {
    testsupport::TempDir dir("flac");
    std::string path = dir.file("probe.flac");
    std::vector<std::int64_t> l = random_codes(3000, 16, 29);
    std::vector<std::int64_t> rch = random_codes(3000, 16, 31);
    testsupport::flacenc::write_flac(path, 44100, {l, rch}, 16);

    flac::FlacInfo info = flac::probe(path);
    EXPECT_EQ(info.sample_rate, 44100);
    EXPECT_EQ(info.channels, 2);
    EXPECT_EQ(info.bits_per_sample, 16);
    EXPECT_EQ(info.total_samples, 3000);
}
