#include <gtest/gtest.h>

#include "soundmine/codec/codec.hpp"
#include "soundmine/codec/rawdat.hpp"
#include "support/fixtures.hpp"

#include <cstring>
#include <fstream>

using namespace soundmine;

namespace {

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

void write_sidecar(const std::string& data_path, const std::string& body) {
    std::ofstream out(data_path + ".meta");
    out << body;
}

}  // namespace

TEST(RawDat, Int16WithHeaderSkip) {
    testsupport::TempDir dir("rawdat");
    std::string path = dir.file("rec.dat");
    std::vector<unsigned char> bytes(8, 0xEE);  // 8-byte junk header
    for (std::int16_t v : {std::int16_t(100), std::int16_t(-100), std::int16_t(16384)}) {
        bytes.push_back(static_cast<unsigned char>(v & 0xFF));
        bytes.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    }
    write_bytes(path, bytes);
    write_sidecar(path, "sample_rate = 2000\nchannels = 1\nencoding = int16le\nheader_bytes = 8\n");

    rawdat::Sidecar sc = rawdat::read_sidecar(path);
    EXPECT_EQ(rawdat::frame_count(path, sc), 3);
    rawdat::RangeResult r = rawdat::decode_range(path, sc, 0, 3, 0);
    ASSERT_EQ(r.samples.size(), 3u);
    EXPECT_FLOAT_EQ(r.samples[0], 100.0f / 32768.0f);
    EXPECT_FLOAT_EQ(r.samples[1], -100.0f / 32768.0f);
    EXPECT_FLOAT_EQ(r.samples[2], 0.5f);
}

TEST(RawDat, Float32Interleaved) {
    testsupport::TempDir dir("rawdat");
    std::string path = dir.file("f.dat");
    std::vector<unsigned char> bytes;
    for (float v : {0.25f, -0.5f, 0.75f, -1.0f}) {  // 2 frames x 2 channels
        unsigned char b[4];
        std::memcpy(b, &v, 4);
        bytes.insert(bytes.end(), b, b + 4);
    }
    write_bytes(path, bytes);
    write_sidecar(path, "sample_rate = 1000\nchannels = 2\nencoding = float32le\n");

    rawdat::Sidecar sc = rawdat::read_sidecar(path);
    EXPECT_EQ(sc.header_bytes, 0);
    EXPECT_EQ(rawdat::frame_count(path, sc), 2);
    rawdat::RangeResult ch0 = rawdat::decode_range(path, sc, 0, 2, 0);
    rawdat::RangeResult ch1 = rawdat::decode_range(path, sc, 0, 2, 1);
    EXPECT_FLOAT_EQ(ch0.samples[0], 0.25f);
    EXPECT_FLOAT_EQ(ch0.samples[1], 0.75f);
    EXPECT_FLOAT_EQ(ch1.samples[0], -0.5f);
    EXPECT_FLOAT_EQ(ch1.samples[1], -1.0f);
}

TEST(RawDat, SidecarValidation) {
    testsupport::TempDir dir("rawdat");
    std::string path = dir.file("bad.dat");
    write_bytes(path, {0, 0, 0, 0});

    write_sidecar(path, "sample_rate = 2000\nchannels = 1\n");
    EXPECT_THROW(rawdat::read_sidecar(path), CorruptContainerError);  // missing encoding

    write_sidecar(path, "sample_rate = 2000\nchannels = 1\nencoding = mulaw\n");
    EXPECT_THROW(rawdat::read_sidecar(path), CorruptContainerError);

    write_sidecar(path, "sample_rate = 0\nchannels = 1\nencoding = int16le\n");
    EXPECT_THROW(rawdat::read_sidecar(path), CorruptContainerError);
}

TEST(RawDat, SidecarStartTimeFlowsThroughProbe) {
    testsupport::TempDir dir("rawdat");
    std::string path = dir.file("t.dat");
    write_bytes(path, std::vector<unsigned char>(400, 1));
    write_sidecar(path,
                  "sample_rate = 100\nchannels = 1\nencoding = int16le\nstart_time = 1234.5\n");

    AudioFileInfo info = probe_audio_file(path);
    EXPECT_EQ(info.format, FormatTag::RAWDAT);
    EXPECT_EQ(info.sample_rate, 100);
    EXPECT_EQ(info.frames, 200);
    ASSERT_TRUE(info.sidecar_start_time.has_value());
    EXPECT_DOUBLE_EQ(*info.sidecar_start_time, 1234.5);
}

TEST(ProbeDispatch, UnrecognizedContainer) {
    testsupport::TempDir dir("rawdat");
    std::string path = dir.file("mystery.bin");
    write_bytes(path, {1, 2, 3, 4, 5, 6, 7, 8});
    EXPECT_THROW(probe_audio_file(path), CorruptContainerError);
}
