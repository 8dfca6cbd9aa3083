// Copyright 2026 The relit Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "relit/core/error.hpp"
#include "relit/core/rng.hpp"
#include "relit/core/sha256.hpp"
#include "relit/io/image_io.hpp"
#include "relit/io/kvconfig.hpp"

namespace fs = std::filesystem;
using namespace relit;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / "relit_test_io";
    fs::create_directories(dir);
    return dir / name;
}

Image random_image(int w, int h, std::uint64_t seed, double scale) {
    SplitMix64 rng(seed);
    Image img(w, h);
    for (float& v : img.data) v = static_cast<float>(rng.uniform() * scale);
    return img;
}

}  // namespace

TEST(Exr, RoundTripIsBitExact) {
    Image img = random_image(17, 9, 1, 1000.0);
    img.at(0, 0, 0) = 1e-30f;
    img.at(3, 4, 2) = 3.4e38f;
    const auto path = scratch("roundtrip.exr");
    io::write_exr(path, img);
    EXPECT_EQ(io::read_exr(path), img);
}

TEST(Exr, TruncatedFileIsRejected) {
    const auto path = scratch("trunc.exr");
    io::write_exr(path, random_image(8, 8, 2, 1.0));
    auto bytes = io::read_file(path);
    bytes.resize(bytes.size() / 2);
    io::write_file(path, bytes);
    EXPECT_THROW(io::read_exr(path), IoError);
}

TEST(Rgbe, RoundTripWithinQuantization) {
    const Image img = random_image(16, 8, 3, 50.0);
    const auto path = scratch("rt.hdr");
    io::write_rgbe(path, img);
    const Image back = io::read_rgbe(path);
    ASSERT_TRUE(back.same_shape(img));
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        float m = std::max({img.data[p * 3], img.data[p * 3 + 1], img.data[p * 3 + 2]});
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(back.data[p * 3 + c], img.data[p * 3 + c], m / 128.0);
    }
}

TEST(Rgbe, ReadsRunLengthEncodedScanlines) {
    // Hand-built 8x1 image: every channel one run of 8 identical bytes.
    std::string header = "#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y 1 +X 8\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    for (std::uint8_t b : {2, 2, 0, 8}) bytes.push_back(b);
    for (std::uint8_t v : {128, 64, 32, 129}) {
        bytes.push_back(128 + 8);
        bytes.push_back(v);
    }
    const auto path = scratch("rle.hdr");
    io::write_file(path, bytes);
    const Image img = io::read_rgbe(path);
    ASSERT_EQ(img.width, 8);
    // exponent 129 -> scale 2^(129-136) = 1/128
    EXPECT_FLOAT_EQ(img.at(5, 0, 0), 128.5f / 128.0f);
    EXPECT_FLOAT_EQ(img.at(5, 0, 1), 64.5f / 128.0f);
    EXPECT_FLOAT_EQ(img.at(7, 0, 2), 32.5f / 128.0f);
}

TEST(Png, QuantizedValuesRoundTripExactly) {
    Image img(5, 3);
    SplitMix64 rng(4);
    for (float& v : img.data) v = static_cast<float>(rng.below(256)) / 255.0f;
    const auto path = scratch("q.png");
    io::write_png(path, img);
    EXPECT_EQ(io::read_png(path), img);
    EXPECT_THROW(io::decode_png({1, 2, 3}), Error);
}

TEST(Files, WriteFailureNamesPath) {
    const auto blocker = scratch("blocker");
    io::write_file(blocker, {1});
    const auto target = blocker / "sub" / "x.bin";
    try {
        io::write_file(target, {1, 2});
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("blocker"), std::string::npos);
    }
}

TEST(Sha256, KnownVector) {
    EXPECT_EQ(sha256_hex(std::string_view("abc")),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

namespace {
io::KvConfig sample_config() {
    return io::KvConfig({
        {"data.subjects", io::ValueType::Int, "24", "subjects", 1.0, std::nullopt},
        {"train.lr", io::ValueType::Real, "0.0003", "learning rate", 0.0, std::nullopt},
        {"train.views", io::ValueType::IntList, "3, 4", "views", 0.0, std::nullopt},
        {"eval.enabled", io::ValueType::Bool, "true", "flag"},
        {"data.root", io::ValueType::String, "work", "root"},
    });
}
}  // namespace

TEST(KvConfig, ParsesFileAndOverrides) {
    auto cfg = sample_config();
    cfg.load_text("# toy\ndata.subjects = 7\ntrain.views = 1,2 , 5\n");
    cfg.apply_override("train.lr=0.01");
    EXPECT_EQ(cfg.get_int("data.subjects"), 7);
    EXPECT_DOUBLE_EQ(cfg.get_real("train.lr"), 0.01);
    EXPECT_EQ(cfg.get_int_list("train.views"), (std::vector<long>{1, 2, 5}));
    EXPECT_TRUE(cfg.get_bool("eval.enabled"));
}

TEST(KvConfig, UnknownKeyIsAConfigErrorNamingTheKey) {
    auto cfg = sample_config();
    try {
        cfg.load_text("data.subjcts = 3\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        EXPECT_NE(std::string(e.what()).find("data.subjcts"), std::string::npos);
    }
}

TEST(KvConfig, RejectsBadValues) {
    auto cfg = sample_config();
    EXPECT_THROW(cfg.set("data.subjects", "0"), Error);
    EXPECT_THROW(cfg.set("data.subjects", "two"), Error);
    EXPECT_THROW(cfg.set("eval.enabled", "yes"), Error);
    EXPECT_THROW(cfg.apply_override("no_equals_sign"), Error);
}

TEST(KvConfig, HashTracksEffectiveValues) {
    auto a = sample_config();
    auto b = sample_config();
    EXPECT_EQ(a.hash(), b.hash());
    b.set("data.subjects", "25");
    EXPECT_NE(a.hash(), b.hash());
}
