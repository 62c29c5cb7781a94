#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "csi2img/csi_codec.hpp"
#include "csi2img/image.hpp"
#include "csi2img/scene.hpp"

namespace csi2img {

enum class Scenario { exp1, exp2, walk };

Scenario scenario_from_string(const std::string& s);
std::string to_string(Scenario s);

// Default train/test sizes per scenario.
int default_train_count(Scenario s);
int default_test_count(Scenario s);

// Class label -> occupied slots. exp1 uses labels 0..2, exp2 labels 0..5.
std::vector<int> class_slots(int label);
int class_count(Scenario s);

// One paired (CSI features, image) example.
struct Sample {
    std::vector<float> features;   // length 312 for the default config
    Image image;                   // 64x64x3
    uint16_t label = 0;
    std::optional<float> walk_t;

    Scene scene_truth(bool walk) const;
};

struct Dataset {
    bool walk = false;
    int feature_length = 0;
    int image_side = 0;
    std::vector<Sample> samples;
};

// Runs the full feedback loop for one scene: per subcarrier
// channel -> SVD -> steering matrix -> decompose -> dequantize ->
// reconstruct, then assembles the feature vector, so features carry real
// quantization error. The image comes from render_scene.
Sample make_sample(const Scene& scene, const ChannelParams& params, const AntennaConfig& cfg,
                   int b_phi, int b_psi, Rng& noise_rng);

// Dataset file, little-endian:
//   magic "CSI2IMG1"
//   u32 sample count, u16 feature length, u16 image side, u8 flags (bit 0:
//   per-sample walk_t present)
//   per sample: u16 label, [f32 walk_t], feature f32s, then width*side*3
//   bytes of RGB pixels.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

struct GenStats {
    // Minimum pairwise distance between class-mean feature vectors of the
    // train split (slot scenarios only).
    double class_separation = 0.0;
    std::vector<int> train_class_counts;
    std::vector<int> test_class_counts;
};

// Generates train.bin and test.bin under out_dir from disjoint seeded
// streams. Sample i of each split depends only on (seed, split, i), so
// generation parallelizes across samples with a fixed output order.
GenStats gen_dataset(Scenario scenario, int n_train, int n_test, uint64_t seed,
                     const std::filesystem::path& out_dir,
                     const ChannelParams& params = ChannelParams::defaults(),
                     const AntennaConfig& cfg = AntennaConfig{}, int b_phi = 6, int b_psi = 4);

// In-memory variant used by gen_dataset and the tests.
Dataset build_split(Scenario scenario, int count, uint64_t seed, bool test_split,
                    const ChannelParams& params, const AntennaConfig& cfg, int b_phi, int b_psi);

}  // namespace csi2img
