#include <gtest/gtest.h>

#include "soundmine/codec/wav.hpp"
#include "support/fixtures.hpp"

#include <filesystem>
#include <fstream>

using namespace soundmine;

TEST(WavDecode, Int16NormalizationConvention) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("codes.wav");
    testsupport::write_wav_int16(path, 2000, {{32767, -32768, 0, 16384}});

    wav::RangeResult r = wav::decode_range(path, 0, 4, 0);
    ASSERT_EQ(r.samples.size(), 4u);
    EXPECT_FLOAT_EQ(r.samples[0], 32767.0f / 32768.0f);
    EXPECT_FLOAT_EQ(r.samples[1], -1.0f);
    EXPECT_FLOAT_EQ(r.samples[2], 0.0f);
    EXPECT_FLOAT_EQ(r.samples[3], 0.5f);
}

TEST(WavDecode, FullRangeRampRoundTripWithinOneLsb) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("ramp.wav");
    std::vector<std::int16_t> ramp;
    for (int v = -32768; v <= 32767; v += 7) ramp.push_back(static_cast<std::int16_t>(v));
    testsupport::write_wav_int16(path, 2000, {ramp});

    wav::RangeResult r = wav::decode_range(path, 0, static_cast<std::int64_t>(ramp.size()), 0);
    ASSERT_EQ(r.samples.size(), ramp.size());
    for (std::size_t i = 0; i < ramp.size(); ++i) {
        double back = static_cast<double>(r.samples[i]) * 32768.0;
        EXPECT_NEAR(back, static_cast<double>(ramp[i]), 1.0) << "at index " << i;
    }
}

TEST(WavDecode, Int24AndInt32AndFloat) {
    testsupport::TempDir dir("wav");

    std::string p24 = dir.file("w24.wav");
    testsupport::write_wav_int24(p24, 48000, {{8388607, -8388608, 0, 4194304}});
    wav::RangeResult r24 = wav::decode_range(p24, 0, 4, 0);
    EXPECT_FLOAT_EQ(r24.samples[0], 8388607.0f / 8388608.0f);
    EXPECT_FLOAT_EQ(r24.samples[1], -1.0f);
    EXPECT_FLOAT_EQ(r24.samples[3], 0.5f);

    std::string p32 = dir.file("w32.wav");
    testsupport::write_wav_int32(p32, 48000, {{2147483647, -2147483647 - 1, 0}});
    wav::RangeResult r32 = wav::decode_range(p32, 0, 3, 0);
    EXPECT_NEAR(r32.samples[0], 1.0f, 1e-6f);
    EXPECT_FLOAT_EQ(r32.samples[1], -1.0f);

    std::string pf = dir.file("wf.wav");
    testsupport::write_wav_float(pf, 48000, {{0.25f, -0.75f, 1.5f}});
    wav::RangeResult rf = wav::decode_range(pf, 0, 3, 0);
    EXPECT_FLOAT_EQ(rf.samples[0], 0.25f);
    EXPECT_FLOAT_EQ(rf.samples[1], -0.75f);
    EXPECT_FLOAT_EQ(rf.samples[2], 1.5f);  // floats pass through unclamped
}

TEST(WavDecode, StereoChannelExtraction) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("st.wav");
    testsupport::write_wav_int16(path, 8000, {{100, 200, 300}, {-100, -200, -300}});

    wav::WavInfo info = wav::probe(path);
    EXPECT_EQ(info.channels, 2);
    EXPECT_EQ(info.frames, 3);

    wav::RangeResult left = wav::decode_range(path, 0, 3, 0);
    wav::RangeResult right = wav::decode_range(path, 0, 3, 1);
    EXPECT_FLOAT_EQ(left.samples[1], 200.0f / 32768.0f);
    EXPECT_FLOAT_EQ(right.samples[1], -200.0f / 32768.0f);
}

TEST(WavDecode, SampleAccurateRangeEqualsSliceOfFullDecode) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("rng.wav");
    std::vector<float> noise = testsupport::white_noise(5000, 0.3f, 42);
    testsupport::write_wav_float_as_int16(path, 2000, {noise});

    wav::RangeResult full = wav::decode_range(path, 0, 5000, 0);
    wav::RangeResult part = wav::decode_range(path, 1234, 2345, 0);
    ASSERT_EQ(part.samples.size(), 2345u - 1234u);
    for (std::size_t i = 0; i < part.samples.size(); ++i)
        EXPECT_EQ(part.samples[i], full.samples[1234 + i]);
}

TEST(WavDecode, TruncatedFileReturnsPrefixWithFlag) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("trunc.wav");
    std::vector<std::int16_t> data(1000, 1234);
    testsupport::write_wav_int16(path, 2000, {data});

    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 1000);

    wav::WavInfo info = wav::probe(path);
    EXPECT_TRUE(info.truncated);
    EXPECT_EQ(info.frames, 500);

    wav::RangeResult r = wav::decode_range(path, 0, 1000, 0);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(r.samples.size(), 500u);
    EXPECT_FLOAT_EQ(r.samples[499], 1234.0f / 32768.0f);
}

TEST(WavDecode, CorruptContainerThrows) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("bad.wav");
    {
        std::ofstream out(path, std::ios::binary);
        out << "this is not audio at all, but long enough to read";
    }
    EXPECT_THROW(wav::probe(path), CorruptContainerError);
    EXPECT_THROW(wav::decode_range(dir.file("absent.wav"), 0, 10, 0), IoError);
}

TEST(WavDecode, ExtraChunksBeforeDataAreSkipped) {
    testsupport::TempDir dir("wav");
    std::string path = dir.file("chunky.wav");
    // Hand-build RIFF with a LIST chunk between fmt and data.
    std::vector<unsigned char> payload;
    testsupport::detail::put16(payload, static_cast<std::uint16_t>(int16_t(-42)));
    testsupport::detail::put16(payload, 42);
    std::vector<unsigned char> b;
    b.insert(b.end(), {'R', 'I', 'F', 'F'});
    testsupport::detail::put32(b, 0);  // lazily wrong riff size; readers use chunks
    b.insert(b.end(), {'W', 'A', 'V', 'E'});
    b.insert(b.end(), {'f', 'm', 't', ' '});
    testsupport::detail::put32(b, 16);
    testsupport::detail::put16(b, 1);
    testsupport::detail::put16(b, 1);
    testsupport::detail::put32(b, 8000);
    testsupport::detail::put32(b, 16000);
    testsupport::detail::put16(b, 2);
    testsupport::detail::put16(b, 16);
    b.insert(b.end(), {'L', 'I', 'S', 'T'});
    testsupport::detail::put32(b, 6);
    b.insert(b.end(), {'I', 'N', 'F', 'O', 'x', 'y'});
    b.insert(b.end(), {'d', 'a', 't', 'a'});
    testsupport::detail::put32(b, static_cast<std::uint32_t>(payload.size()));
    b.insert(b.end(), payload.begin(), payload.end());
    testsupport::detail::write_file(path, b);

    wav::WavInfo info = wav::probe(path);
    EXPECT_EQ(info.frames, 2);
    wav::RangeResult r = wav::decode_range(path, 0, 2, 0);
    EXPECT_FLOAT_EQ(r.samples[0], -42.0f / 32768.0f);
    EXPECT_FLOAT_EQ(r.samples[1], 42.0f / 32768.0f);
}
