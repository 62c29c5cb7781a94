#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "csi2img/binary_io.hpp"
#include "csi2img/capture_record.hpp"
#include "csi2img/rng.hpp"

using namespace csi2img;
namespace fs = std::filesystem;

namespace {

CaptureFile random_capture(Rng& rng, int frames) {
    CaptureFile cap;
    cap.b_phi = 6;
    cap.b_psi = 4;
    const int n_angles = angle_count(cap.config);
    for (int f = 0; f < frames; ++f) {
        CaptureFrame frame;
        frame.timestamp_us = rng.next() >> 20;
        for (int s = 0; s < cap.config.n_subcarriers; ++s) {
            QuantizedAngleRecord rec;
            rec.b_phi = cap.b_phi;
            rec.b_psi = cap.b_psi;
            for (int i = 0; i < n_angles; ++i) {
                rec.phi_indices.push_back(uint16_t(rng.uniform_int(0, 63)));
                rec.psi_indices.push_back(uint16_t(rng.uniform_int(0, 15)));
            }
            frame.subcarriers.push_back(std::move(rec));
        }
        cap.frames.push_back(std::move(frame));
    }
    return cap;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("capture_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("capture file round trip") {
    TempDir tmp;
    Rng rng(9001);
    const CaptureFile cap = random_capture(rng, 5);
    const fs::path file = tmp.path / "frames.bin";
    write_capture_file(file, cap);
    const CaptureFile back = read_capture_file(file);

    REQUIRE(back.frames.size() == cap.frames.size());
    CHECK(back.config.n_rx == cap.config.n_rx);
    CHECK(back.config.n_tx == cap.config.n_tx);
    CHECK(back.b_phi == cap.b_phi);
    CHECK(back.b_psi == cap.b_psi);
    for (size_t f = 0; f < cap.frames.size(); ++f) {
        CHECK(back.frames[f].timestamp_us == cap.frames[f].timestamp_us);
        for (size_t s = 0; s < cap.frames[f].subcarriers.size(); ++s) {
            CHECK(back.frames[f].subcarriers[s].phi_indices ==
                  cap.frames[f].subcarriers[s].phi_indices);
            CHECK(back.frames[f].subcarriers[s].psi_indices ==
                  cap.frames[f].subcarriers[s].psi_indices);
        }
    }
}

TEST_CASE("capture records feed straight into the codec") {
    TempDir tmp;
    Rng rng(9002);
    const CaptureFile cap = random_capture(rng, 1);
    const fs::path file = tmp.path / "frames.bin";
    write_capture_file(file, cap);
    const CaptureFile back = read_capture_file(file);
    for (const auto& rec : back.frames[0].subcarriers) {
        const SteeringMatrix v = reconstruct_v(dequantize(rec), back.config);
        CHECK(gram_defect(v.v) < 1e-6);
    }
}

TEST_CASE("bad magic is rejected with an offset") {
    TempDir tmp;
    const fs::path file = tmp.path / "bogus.bin";
    std::ofstream(file, std::ios::binary) << "NOTMAGIC and more";
    CHECK_THROWS_AS((void)read_capture_file(file), format_error);
}

TEST_CASE("truncated frame is rejected") {
    TempDir tmp;
    Rng rng(9003);
    const CaptureFile cap = random_capture(rng, 2);
    const fs::path file = tmp.path / "frames.bin";
    write_capture_file(file, cap);

    const auto size = fs::file_size(file);
    fs::resize_file(file, size - 7);
    CHECK_THROWS_AS((void)read_capture_file(file), format_error);
}

TEST_CASE("out-of-range index is rejected on write") {
    CaptureFile cap;
    cap.b_phi = 4;
    cap.b_psi = 2;
    CaptureFrame frame;
    frame.subcarriers.resize(size_t(cap.config.n_subcarriers));
    for (auto& rec : frame.subcarriers) {
        rec.phi_indices.assign(3, 0);
        rec.psi_indices.assign(3, 0);
    }
    frame.subcarriers[0].phi_indices[0] = 16;  // needs 5 bits
    cap.frames.push_back(frame);
    CHECK_THROWS_AS(write_capture_file("/tmp/capture_oor.bin", cap), std::invalid_argument);
}
