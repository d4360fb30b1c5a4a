#include <gtest/gtest.h>

#include "soundmine/parms.hpp"
#include "support/fixtures.hpp"

#include <fstream>

using namespace soundmine;

TEST(ParmParse, TypedInference) {
    ParmSet p = parse_parm_text("threshold = 2.5\n# note\nnfft = 2048");
    ASSERT_EQ(p.entries().size(), 2u);
    ASSERT_TRUE(p.contains("threshold"));
    EXPECT_EQ(type_of(*p.find("threshold")), ParmType::Float);
    EXPECT_DOUBLE_EQ(p.get_float("threshold"), 2.5);
    EXPECT_EQ(type_of(*p.find("nfft")), ParmType::Int);
    EXPECT_EQ(p.get_int("nfft"), 2048);
    EXPECT_FALSE(p.validated);
}

TEST(ParmParse, DuplicateKeyReportsSecondLine) {
    try {
        parse_parm_text("nfft = 256\nhop = 64\nnfft = 512\n");
        FAIL() << "expected ParmDuplicateKeyError";
    } catch (const ParmDuplicateKeyError& e) {
        EXPECT_EQ(e.line, 3);
    }
}

TEST(ParmParse, StringValueVerbatim) {
    ParmSet p = parse_parm_text("name = blue_A");
    EXPECT_EQ(type_of(*p.find("name")), ParmType::String);
    EXPECT_EQ(p.get_string("name"), "blue_A");
}

TEST(ParmParse, BoolAndNegativeAndWhitespace) {
    ParmSet p = parse_parm_text("  flag =  true \noffset = -12\nratio = -0.5\n");
    EXPECT_EQ(p.get_bool("flag"), true);
    EXPECT_EQ(p.get_int("offset"), -12);
    EXPECT_DOUBLE_EQ(p.get_float("ratio"), -0.5);
}

TEST(ParmParse, CommentsAndBlankLinesIgnored) {
    ParmSet p = parse_parm_text("\n# full comment\na = 1  # trailing comment\n\n");
    ASSERT_EQ(p.entries().size(), 1u);
    EXPECT_EQ(p.get_int("a"), 1);
}

TEST(ParmParse, SyntaxErrorCarriesLineNumber) {
    try {
        parse_parm_text("a = 1\nnot a pair\n");
        FAIL() << "expected ParmSyntaxError";
    } catch (const ParmSyntaxError& e) {
        EXPECT_EQ(e.line, 2);
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
    }
}

TEST(ParmParse, EntriesKeepFileOrder) {
    ParmSet p = parse_parm_text("z = 1\na = 2\nm = 3\n");
    ASSERT_EQ(p.entries().size(), 3u);
    EXPECT_EQ(p.entries()[0].first, "z");
    EXPECT_EQ(p.entries()[1].first, "a");
    EXPECT_EQ(p.entries()[2].first, "m");
}

TEST(ParmParse, FileRoundTrip) {
    testsupport::TempDir dir("parms");
    std::string path = dir.file("det.parm");
    {
        std::ofstream out(path);
        out << "threshold = 2.5\nnfft = 2048\n";
    }
    ParmSet p = parse_parm_file(path);
    EXPECT_EQ(p.source_path, path);
    EXPECT_EQ(p.get_int("nfft"), 2048);
    EXPECT_THROW(parse_parm_file(dir.file("missing.parm")), IoError);
}
