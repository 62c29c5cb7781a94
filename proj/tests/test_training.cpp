#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "csi2img/losses.hpp"
#include "csi2img/training.hpp"

using namespace csi2img;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("train_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
}

// Small synthetic dataset: class-colored rectangles with distinct feature
// directions, enough structure for descent checks.
Dataset toy_dataset(int n, uint64_t seed) {
    Dataset ds;
    ds.walk = false;
    ds.feature_length = kCsiInputDim;
    ds.image_side = kImageSide;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        Sample s;
        s.label = uint16_t(i % 3);
        s.features.assign(kCsiInputDim, 0.0f);
        for (int d = 0; d < kCsiInputDim; ++d)
            s.features[size_t(d)] = float(0.4 * rng.normal() + (d % 3 == s.label ? 0.5 : -0.2));
        Scene scene;
        scene.slots = {int(s.label) + 1};
        s.image = render_scene(scene);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

TrainConfig small_cfg(TrainConfig::Mode mode, int iters, uint64_t seed = 17) {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.iterations = iters;
    cfg.batch_size = 4;
    cfg.generality_interval = 8;
    cfg.seed = seed;
    cfg.checkpoint_every = 0;  // final only
    cfg.g_width_div = 32;
    cfg.d_width_div = 4;
    return cfg;
}

}  // namespace

TEST_CASE("generator-only: a single step descends on a repeated batch") {
    TempDir tmp;
    const Dataset one = toy_dataset(1, 5);  // every batch is the same sample
    int wins = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        TrainConfig cfg = small_cfg(TrainConfig::Mode::generator_only, 2, seed);
        const TrainResult r =
            train_generator_only(one, cfg, tmp.path / ("c" + std::to_string(seed)));
        REQUIRE(r.log.size() == 2);
        if (*r.log[1].generator_mse < *r.log[0].generator_mse) ++wins;
    }
    CHECK(wins >= 14);
}

TEST_CASE("generator-only: loss collapses over a short run") {
    TempDir tmp;
    const Dataset data = toy_dataset(12, 6);
    TrainConfig cfg = small_cfg(TrainConfig::Mode::generator_only, 150);
    cfg.batch_size = 8;
    const TrainResult r = train_generator_only(data, cfg, tmp.path / "run.ckpt");
    const double first = *r.log.front().generator_mse;
    const double last = *r.log.back().generator_mse;
    CHECK(last < 0.5 * first);
    for (const auto& rec : r.log) CHECK(std::isfinite(*rec.generator_mse));
}

TEST_CASE("same config and seed give bitwise-identical checkpoints") {
    TempDir tmp;
    const Dataset data = toy_dataset(8, 7);
    for (const auto mode : {TrainConfig::Mode::generator_only, TrainConfig::Mode::gan_only,
                            TrainConfig::Mode::hybrid}) {
        TrainConfig cfg = small_cfg(mode, 6);
        const fs::path a = tmp.path / (to_string(mode) + "_a.ckpt");
        const fs::path b = tmp.path / (to_string(mode) + "_b.ckpt");
        switch (mode) {
            case TrainConfig::Mode::generator_only:
                train_generator_only(data, cfg, a);
                train_generator_only(data, cfg, b);
                break;
            case TrainConfig::Mode::gan_only:
                train_gan_only(data, cfg, a);
                train_gan_only(data, cfg, b);
                break;
            case TrainConfig::Mode::hybrid:
                train_hybrid(data, cfg, a);
                train_hybrid(data, cfg, b);
                break;
        }
        CHECK(file_bytes(a) == file_bytes(b));
    }
}

TEST_CASE("gan-only: one discriminator step moves real up and fake down") {
    const Dataset data = toy_dataset(8, 9);
    int real_up = 0, fake_down = 0;
    for (uint64_t seed = 0; seed < 20; ++seed) {
        Generator gen(32);
        Discriminator disc(4);
        Rng gi = make_stream(seed, kStreamInitGenerator);
        Rng di = make_stream(seed, kStreamInitDiscriminator);
        gen.init_params(gi);
        disc.init_params(di);
        Adam adam_d;
        adam_d.bind(disc.params());

        Tensor real({4, kImageSide, kImageSide, 3});
        for (int i = 0; i < 4; ++i) {
            const auto& img = data.samples[size_t(i)].image;
            for (size_t p = 0; p < img.pixels.size(); ++p)
                real.ptr()[size_t(i) * img.pixels.size() + p] = normalize_pixel(img.pixels[p]);
        }
        Tensor csi({4, kCsiInputDim});
        for (int i = 0; i < 4; ++i)
            std::copy(data.samples[size_t(i)].features.begin(),
                      data.samples[size_t(i)].features.end(),
                      csi.ptr() + int64_t(i) * kCsiInputDim);
        const Tensor fake = gen.forward(csi, true, false);

        // Deterministic probe: same dropout stream, frozen statistics.
        auto probe = [&](const Tensor& x) {
            Rng r(1234);
            const Tensor p = disc.forward(x, true, &r, false);
            double s = 0.0;
            for (const float v : p.data) s += v;
            return s / double(p.size());
        };

        const double real_before = probe(real);
        {
            Rng r(99);
            const Tensor p = disc.forward(real, true, &r);
            auto loss = bce_loss_const(p, 1.0f);
            disc.backward(loss.grad);
            adam_d.step(disc.params());
        }
        if (probe(real) > real_before) ++real_up;

        const double fake_before = probe(fake);
        {
            Rng r(98);
            const Tensor p = disc.forward(fake, true, &r);
            auto loss = bce_loss_const(p, 0.0f);
            disc.backward(loss.grad);
            adam_d.step(disc.params());
        }
        if (probe(fake) < fake_before) ++fake_down;
    }
    CHECK(real_up >= 14);
    CHECK(fake_down >= 14);
}

TEST_CASE("gan-only never computes an MSE loss") {
    TempDir tmp;
    const Dataset data = toy_dataset(8, 10);
    const TrainResult r =
        train_gan_only(data, small_cfg(TrainConfig::Mode::gan_only, 4), tmp.path / "g.ckpt");
    for (const auto& rec : r.log) {
        CHECK(!rec.generator_mse.has_value());
        CHECK(rec.discriminator_bce.has_value());
        CHECK(rec.generality_bce.has_value());
    }
}

TEST_CASE("hybrid: exactly floor(N/K) generality steps") {
    TempDir tmp;
    const Dataset data = toy_dataset(8, 11);
    {
        TrainConfig cfg = small_cfg(TrainConfig::Mode::hybrid, 16);
        cfg.generality_interval = 8;
        const TrainResult r = train_hybrid(data, cfg, tmp.path / "h1.ckpt");
        CHECK(r.generality_steps == 2);
        for (const auto& rec : r.log)
            CHECK(rec.generality_bce.has_value() == (rec.iteration % 8 == 0));
    }
    {
        TrainConfig cfg = small_cfg(TrainConfig::Mode::hybrid, 5);
        cfg.generality_interval = 1;
        CHECK(train_hybrid(data, cfg, tmp.path / "h2.ckpt").generality_steps == 5);
    }
    {
        TrainConfig cfg = small_cfg(TrainConfig::Mode::hybrid, 5);
        cfg.generality_interval = 6;  // K > N -> never
        CHECK(train_hybrid(data, cfg, tmp.path / "h3.ckpt").generality_steps == 0);
    }
}

TEST_CASE("generator-only checkpoints contain no discriminator tensors") {
    TempDir tmp;
    const Dataset data = toy_dataset(6, 12);
    const fs::path ckpt = tmp.path / "gonly.ckpt";
    train_generator_only(data, small_cfg(TrainConfig::Mode::generator_only, 3), ckpt);
    NamedTensors adam_state;
    const NamedTensors weights = read_checkpoint(ckpt, &adam_state);
    for (const auto& [name, t] : weights.tensors) CHECK(name.rfind("d.", 0) != 0);
    for (const auto& [name, t] : adam_state.tensors) CHECK(name.find(".d.") == std::string::npos);
    CHECK(weights.find("g.fc.w") != nullptr);
    CHECK(adam_state.find("adam.g.step") != nullptr);
}

TEST_CASE("frozen networks stay frozen (hash-checked)") {
    TempDir tmp;
    const Dataset data = toy_dataset(8, 13);
    for (const auto mode : {TrainConfig::Mode::gan_only, TrainConfig::Mode::hybrid}) {
        TrainConfig cfg = small_cfg(mode, 6);
        cfg.freeze_check = true;
        cfg.generality_interval = 2;
        if (mode == TrainConfig::Mode::gan_only)
            CHECK_NOTHROW(train_gan_only(data, cfg, tmp.path / "fz1.ckpt"));
        else
            CHECK_NOTHROW(train_hybrid(data, cfg, tmp.path / "fz2.ckpt"));
    }
}

TEST_CASE("log records serialize tab-separated with '-' placeholders") {
    TrainLogRecord r;
    r.iteration = 12;
    r.generator_mse = 0.25;
    r.wall_ms = 3.5;
    const std::string line = format_log_record(r);
    std::istringstream is(line);
    std::string f0, f1, f2, f3, f4;
    is >> f0 >> f1 >> f2 >> f3 >> f4;
    CHECK(f0 == "12");
    CHECK(f1 == "0.25");
    CHECK(f2 == "-");
    CHECK(f3 == "-");
    CHECK(f4 == "3.500");
}

TEST_CASE("checkpoint cadence writes intermediate files") {
    TempDir tmp;
    const Dataset data = toy_dataset(6, 14);
    TrainConfig cfg = small_cfg(TrainConfig::Mode::generator_only, 5);
    cfg.checkpoint_every = 2;
    const fs::path ckpt = tmp.path / "cad.ckpt";
    train_generator_only(data, cfg, ckpt);
    CHECK(fs::exists(tmp.path / "cad.ckpt.iter2"));
    CHECK(fs::exists(tmp.path / "cad.ckpt.iter4"));
    CHECK(fs::exists(ckpt));
}

TEST_CASE("generate_images: deterministic, in range, and empty-safe") {
    TempDir tmp;
    const Dataset data = toy_dataset(5, 15);
    const fs::path ckpt = tmp.path / "gen.ckpt";
    train_generator_only(data, small_cfg(TrainConfig::Mode::generator_only, 3), ckpt);
    LoadedModel model = load_model(ckpt);

    const auto imgs1 = generate_images(*model.generator, data);
    const auto imgs2 = generate_images(*model.generator, data);
    REQUIRE(imgs1.size() == 5);
    CHECK(imgs1[0].width == 64);
    for (size_t i = 0; i < imgs1.size(); ++i) CHECK(imgs1[i] == imgs2[i]);

    const auto none = generate_images(*model.generator, std::vector<const float*>{}, 312);
    CHECK(none.empty());
}

TEST_CASE("training rejects bad configs and empty datasets") {
    TempDir tmp;
    const Dataset data = toy_dataset(4, 16);
    TrainConfig cfg = small_cfg(TrainConfig::Mode::generator_only, 1);
    cfg.batch_size = 1;
    CHECK_THROWS_AS(train_generator_only(data, cfg, tmp.path / "x.ckpt"),
                    std::invalid_argument);
    cfg.batch_size = 4;
    cfg.mode = TrainConfig::Mode::gan_only;
    CHECK_THROWS_AS(train_generator_only(data, cfg, tmp.path / "x.ckpt"),
                    std::invalid_argument);
    cfg.mode = TrainConfig::Mode::generator_only;
    const Dataset empty;
    CHECK_THROWS_AS(train_generator_only(empty, cfg, tmp.path / "x.ckpt"),
                    std::invalid_argument);
}
