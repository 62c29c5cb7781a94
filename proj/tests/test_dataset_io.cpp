#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "csi2img/binary_io.hpp"
#include "csi2img/dataset.hpp"

using namespace csi2img;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("dataset_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Dataset random_dataset(Rng& rng, int count, bool walk) {
    Dataset ds;
    ds.walk = walk;
    ds.feature_length = 312;
    ds.image_side = 64;
    for (int i = 0; i < count; ++i) {
        Sample s;
        s.label = walk ? 0 : uint16_t(rng.uniform_int(0, 5));
        if (walk) s.walk_t = float(rng.uniform());
        s.features.resize(312);
        for (auto& f : s.features) f = float(rng.uniform(-1.0, 1.0));
        s.image = Image(64, 64);
        for (auto& p : s.image.pixels) p = uint8_t(rng.uniform_int(0, 255));
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("scenario defaults and class tables") {
    CHECK(default_train_count(Scenario::exp1) == 180);
    CHECK(default_test_count(Scenario::exp1) == 184);
    CHECK(default_train_count(Scenario::exp2) == 720);
    CHECK(default_test_count(Scenario::exp2) == 330);
    CHECK(default_train_count(Scenario::walk) == 515);
    CHECK(default_test_count(Scenario::walk) == 498);

    CHECK(class_slots(0) == std::vector<int>{1});
    CHECK(class_slots(3) == std::vector<int>{1, 2});
    CHECK(class_slots(5) == std::vector<int>{2, 3});
    CHECK_THROWS_AS((void)class_slots(6), std::invalid_argument);
    CHECK(class_count(Scenario::exp1) == 3);
    CHECK(class_count(Scenario::exp2) == 6);
    CHECK(scenario_from_string("exp2") == Scenario::exp2);
    CHECK_THROWS_AS((void)scenario_from_string("exp3"), std::invalid_argument);
}

TEST_CASE("dataset save/load round trip (slot and walk layouts)") {
    TempDir tmp;
    Rng rng(3001);
    for (const bool walk : {false, true}) {
        const Dataset ds = random_dataset(rng, 17, walk);
        const fs::path file = tmp.path / (walk ? "w.bin" : "s.bin");
        save_dataset(file, ds);
        const Dataset back = load_dataset(file);
        REQUIRE(back.samples.size() == ds.samples.size());
        CHECK(back.walk == walk);
        CHECK(back.feature_length == 312);
        CHECK(back.image_side == 64);
        for (size_t i = 0; i < ds.samples.size(); ++i) {
            CHECK(back.samples[i].label == ds.samples[i].label);
            CHECK(back.samples[i].features == ds.samples[i].features);
            CHECK(back.samples[i].image == ds.samples[i].image);
            if (walk) CHECK(*back.samples[i].walk_t == *ds.samples[i].walk_t);
        }
    }
}

TEST_CASE("saving twice produces identical bytes") {
    TempDir tmp;
    Rng rng(3002);
    const Dataset ds = random_dataset(rng, 5, false);
    save_dataset(tmp.path / "a.bin", ds);
    save_dataset(tmp.path / "b.bin", ds);
    CHECK(file_bytes(tmp.path / "a.bin") == file_bytes(tmp.path / "b.bin"));
}

TEST_CASE("gen_dataset writes both splits with the requested counts") {
    TempDir tmp;
    ChannelParams p = ChannelParams::defaults();
    const GenStats stats = gen_dataset(Scenario::exp1, 12, 9, 77, tmp.path, p);
    const Dataset train = load_dataset(tmp.path / "train.bin");
    const Dataset test = load_dataset(tmp.path / "test.bin");
    CHECK(train.samples.size() == 12);
    CHECK(test.samples.size() == 9);
    CHECK(stats.class_separation > 0.0);

    // repeated invocation, same seed -> byte-identical files
    TempDir tmp2;
    gen_dataset(Scenario::exp1, 12, 9, 77, tmp2.path, p);
    CHECK(file_bytes(tmp.path / "train.bin") == file_bytes(tmp2.path / "train.bin"));
    CHECK(file_bytes(tmp.path / "test.bin") == file_bytes(tmp2.path / "test.bin"));
}

TEST_CASE("bad magic reports the byte offset") {
    TempDir tmp;
    const fs::path file = tmp.path / "bad.bin";
    std::ofstream(file, std::ios::binary) << "WRONGMAG rest of file";
    try {
        (void)load_dataset(file);
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(std::string(e.what()).find("byte 0") != std::string::npos);
    }
}

TEST_CASE("truncated sample data is rejected") {
    TempDir tmp;
    Rng rng(3003);
    const Dataset ds = random_dataset(rng, 3, false);
    const fs::path file = tmp.path / "t.bin";
    save_dataset(file, ds);
    fs::resize_file(file, fs::file_size(file) - 100);
    CHECK_THROWS_AS((void)load_dataset(file), format_error);
}
