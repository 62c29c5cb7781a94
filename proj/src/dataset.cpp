#include "csi2img/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "csi2img/binary_io.hpp"
#include "csi2img/parallel.hpp"
#include "csi2img/svd.hpp"

namespace csi2img {

namespace {
constexpr char kMagic[] = "CSI2IMG1";
}

Scenario scenario_from_string(const std::string& s) {
    if (s == "exp1") return Scenario::exp1;
    if (s == "exp2") return Scenario::exp2;
    if (s == "walk") return Scenario::walk;
    throw std::invalid_argument("unknown scenario: " + s);
}

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::exp1: return "exp1";
        case Scenario::exp2: return "exp2";
        case Scenario::walk: return "walk";
    }
    return "?";
}

int default_train_count(Scenario s) {
    switch (s) {
        case Scenario::exp1: return 180;
        case Scenario::exp2: return 720;
        case Scenario::walk: return 515;
    }
    return 0;
}

int default_test_count(Scenario s) {
    switch (s) {
        case Scenario::exp1: return 184;
        case Scenario::exp2: return 330;
        case Scenario::walk: return 498;
    }
    return 0;
}

std::vector<int> class_slots(int label) {
    switch (label) {
        case 0: return {1};
        case 1: return {2};
        case 2: return {3};
        case 3: return {1, 2};
        case 4: return {1, 3};
        case 5: return {2, 3};
    }
    throw std::invalid_argument("class label out of range: " + std::to_string(label));
}

int class_count(Scenario s) {
    switch (s) {
        case Scenario::exp1: return 3;
        case Scenario::exp2: return 6;
        case Scenario::walk: return 1;
    }
    return 0;
}

Scene Sample::scene_truth(bool walk) const {
    Scene scene;
    if (walk) {
        scene.walk_t = walk_t ? double(*walk_t) : 0.0;
    } else {
        scene.slots = class_slots(label);
    }
    return scene;
}

Sample make_sample(const Scene& scene, const ChannelParams& params, const AntennaConfig& cfg,
                   int b_phi, int b_psi, Rng& noise_rng) {
    scene.validate();
    cfg.validate();

    std::vector<SteeringMatrix> per_subcarrier;
    per_subcarrier.reserve(size_t(cfg.n_subcarriers));
    for (int s = 0; s < cfg.n_subcarriers; ++s) {
        const CMat h = synth_channel(scene, s, params, cfg, noise_rng);
        // The feedback describes the channel in TX x RX orientation; its
        // right-singular matrix then has n_rx rows, of which the leading
        // n_tx columns are the steering matrix.
        const SvdTriple svd = svd_small(h.transpose_plain());
        CMat steering(cfg.n_rx, cfg.n_tx);
        for (int r = 0; r < cfg.n_rx; ++r)
            for (int c = 0; c < cfg.n_tx; ++c) steering(r, c) = svd.v(r, c);
        const QuantizedAngleRecord rec = decompose_v(SteeringMatrix{steering}, b_phi, b_psi);
        per_subcarrier.push_back(reconstruct_v(dequantize(rec), cfg));
    }

    Sample sample;
    sample.features = feature_vector(per_subcarrier, cfg).values;
    sample.image = render_scene(scene);
    if (scene.walk_t) sample.walk_t = float(*scene.walk_t);
    return sample;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    io::put_bytes(os, kMagic, 8);
    io::put_le<uint32_t>(os, uint32_t(ds.samples.size()));
    io::put_le<uint16_t>(os, uint16_t(ds.feature_length));
    io::put_le<uint16_t>(os, uint16_t(ds.image_side));
    io::put_le<uint8_t>(os, ds.walk ? 1 : 0);
    for (const auto& s : ds.samples) {
        if (int(s.features.size()) != ds.feature_length)
            throw std::invalid_argument("sample feature length mismatch");
        if (s.image.width != ds.image_side || s.image.height != ds.image_side)
            throw std::invalid_argument("sample image size mismatch");
        io::put_le<uint16_t>(os, s.label);
        if (ds.walk) io::put_f32(os, s.walk_t ? *s.walk_t : 0.0f);
        for (const float f : s.features) io::put_f32(os, f);
        io::put_bytes(os, s.image.pixels.data(), s.image.pixels.size());
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const std::string ctx = path.string();

    io::expect_magic(is, kMagic, ctx);
    Dataset ds;
    const uint32_t count = io::get_le<uint32_t>(is, ctx);
    ds.feature_length = io::get_le<uint16_t>(is, ctx);
    ds.image_side = io::get_le<uint16_t>(is, ctx);
    const uint8_t flags = io::get_le<uint8_t>(is, ctx);
    if (flags > 1) throw format_error(ctx + ": unknown header flags");
    ds.walk = (flags & 1) != 0;
    if (ds.feature_length < 1 || ds.image_side < 1)
        throw format_error(ctx + ": bad header dimensions");

    ds.samples.resize(count);
    for (auto& s : ds.samples) {
        s.label = io::get_le<uint16_t>(is, ctx);
        if (ds.walk) s.walk_t = io::get_f32(is, ctx);
        s.features.resize(size_t(ds.feature_length));
        for (auto& f : s.features) f = io::get_f32(is, ctx);
        s.image = Image(ds.image_side, ds.image_side);
        io::read_exact(is, s.image.pixels.data(), s.image.pixels.size(), ctx);
    }
    return ds;
}

Dataset build_split(Scenario scenario, int count, uint64_t seed, bool test_split,
                    const ChannelParams& params, const AntennaConfig& cfg, int b_phi,
                    int b_psi) {
    if (count < 1) throw std::invalid_argument("split size must be >= 1");
    params.validate();

    Dataset ds;
    ds.walk = scenario == Scenario::walk;
    ds.feature_length = cfg.feature_length();
    ds.image_side = kImageSide;
    ds.samples.resize(size_t(count));

    const uint64_t scene_tag = test_split ? kStreamSceneTest : kStreamSceneTrain;
    const uint64_t noise_tag = test_split ? kStreamNoiseTest : kStreamNoiseTrain;
    const int n_classes = class_count(scenario);

    parallel_for(0, count, [&](int64_t lo, int64_t hi) {
        for (int64_t i = lo; i < hi; ++i) {
            Rng scene_rng = make_stream(seed, scene_tag, uint64_t(i));
            Rng noise_rng = make_stream(seed, noise_tag, uint64_t(i));
            Scene scene;
            uint16_t label = 0;
            if (scenario == Scenario::walk) {
                scene.walk_t = scene_rng.uniform();
            } else {
                label = uint16_t(scene_rng.uniform_int(0, n_classes - 1));
                scene.slots = class_slots(label);
            }
            scene.jitter_px = scene_rng.uniform_int(-kMaxJitterPx, kMaxJitterPx);
            Sample s = make_sample(scene, params, cfg, b_phi, b_psi, noise_rng);
            s.label = label;
            ds.samples[size_t(i)] = std::move(s);
        }
    });
    return ds;
}

namespace {

double class_separation(const Dataset& ds, int n_classes) {
    if (ds.walk || ds.samples.empty()) return 0.0;
    const size_t dim = size_t(ds.feature_length);
    std::vector<std::vector<double>> means(size_t(n_classes), std::vector<double>(dim, 0.0));
    std::vector<int> counts(size_t(n_classes), 0);
    for (const auto& s : ds.samples) {
        auto& m = means[s.label];
        for (size_t d = 0; d < dim; ++d) m[d] += s.features[d];
        ++counts[s.label];
    }
    double min_dist = -1.0;
    for (int a = 0; a < n_classes; ++a) {
        if (counts[size_t(a)] == 0) continue;
        for (int b = a + 1; b < n_classes; ++b) {
            if (counts[size_t(b)] == 0) continue;
            double d2 = 0.0;
            for (size_t d = 0; d < dim; ++d) {
                const double diff = means[size_t(a)][d] / counts[size_t(a)] -
                                    means[size_t(b)][d] / counts[size_t(b)];
                d2 += diff * diff;
            }
            const double dist = std::sqrt(d2);
            if (min_dist < 0.0 || dist < min_dist) min_dist = dist;
        }
    }
    return min_dist < 0.0 ? 0.0 : min_dist;
}

std::vector<int> label_histogram(const Dataset& ds, int n_classes) {
    std::vector<int> counts(size_t(n_classes), 0);
    for (const auto& s : ds.samples)
        if (s.label < n_classes) ++counts[s.label];
    return counts;
}

}  // namespace

GenStats gen_dataset(Scenario scenario, int n_train, int n_test, uint64_t seed,
                     const std::filesystem::path& out_dir, const ChannelParams& params,
                     const AntennaConfig& cfg, int b_phi, int b_psi) {
    if (n_train < 1 || n_test < 1) throw std::invalid_argument("split sizes must be >= 1");
    std::filesystem::create_directories(out_dir);

    const Dataset train = build_split(scenario, n_train, seed, false, params, cfg, b_phi, b_psi);
    const Dataset test = build_split(scenario, n_test, seed, true, params, cfg, b_phi, b_psi);
    save_dataset(out_dir / "train.bin", train);
    save_dataset(out_dir / "test.bin", test);

    GenStats stats;
    const int n_classes = class_count(scenario);
    stats.class_separation = class_separation(train, n_classes);
    stats.train_class_counts = label_histogram(train, n_classes);
    stats.test_class_counts = label_histogram(test, n_classes);
    return stats;
}

}  // namespace csi2img
