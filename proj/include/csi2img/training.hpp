#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "csi2img/checkpoint.hpp"
#include "csi2img/dataset.hpp"
#include "csi2img/networks.hpp"

namespace csi2img {

inline constexpr uint64_t kDefaultSeed = 424242;

struct TrainConfig {
    enum class Mode { generator_only, gan_only, hybrid };

    Mode mode = Mode::generator_only;
    int iterations = 32000;        // N
    int batch_size = 32;
    int generality_interval = 8;   // K, hybrid only
    uint64_t seed = kDefaultSeed;
    int checkpoint_every = 1000;
    int g_width_div = 1;
    int d_width_div = 1;
    // Hashes the frozen network's parameters around every step and throws
    // if they moved. Test/debug aid.
    bool freeze_check = false;

    void validate() const;
};

TrainConfig::Mode mode_from_string(const std::string& s);
std::string to_string(TrainConfig::Mode m);

// One log line per iteration; absent losses stay unset in modes that never
// compute them. Serialized tab-separated with '-' for absent fields.
struct TrainLogRecord {
    int iteration = 0;
    std::optional<double> generator_mse;
    std::optional<double> discriminator_bce;
    std::optional<double> generality_bce;
    double wall_ms = 0.0;
};

std::string format_log_record(const TrainLogRecord& r);

struct TrainResult {
    std::vector<TrainLogRecord> log;
    int generality_steps = 0;
};

// Paired MSE regression on (CSI, image) batches; no discriminator exists.
TrainResult train_generator_only(const Dataset& data, const TrainConfig& cfg,
                                 const std::filesystem::path& ckpt_path,
                                 std::ostream* log_stream = nullptr);

// Purely adversarial: discriminator on real/fake, then the generator
// through the frozen discriminator toward REAL. Fakes come from the batch
// CSI. No pairing loss anywhere.
TrainResult train_gan_only(const Dataset& data, const TrainConfig& cfg,
                           const std::filesystem::path& ckpt_path,
                           std::ostream* log_stream = nullptr);

// Interleaving: per iteration an MSE step, a discriminator step on real
// images, a discriminator step on generator output from random 312-dim
// standard-normal noise, and every K-th iteration a generality step on the
// batch CSI.
TrainResult train_hybrid(const Dataset& data, const TrainConfig& cfg,
                         const std::filesystem::path& ckpt_path,
                         std::ostream* log_stream = nullptr);

// Inference pass over feature vectors, denormalized to 8-bit images.
std::vector<Image> generate_images(Generator& gen, const std::vector<const float*>& csi,
                                   int feature_length);
std::vector<Image> generate_images(Generator& gen, const Dataset& data);

}  // namespace csi2img
