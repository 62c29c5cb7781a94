#pragma once

#include <memory>

#include "csi2img/adam.hpp"
#include "csi2img/layers.hpp"

namespace csi2img {

inline constexpr int kCsiInputDim = 312;
inline constexpr float kInitStddev = 0.02f;

// CSI-to-image generator:
//   dense 312 -> 65536, ReLU, reshape 8x8x1024,
//   3 x [nearest 2x upsample, 3x3 conv (512/256/128), batchnorm(0.8), ReLU],
//   3x3 conv to 3 channels, tanh.
//
// width_div scales the channel counts (65536/d, 1024/d, 512/d, 256/d,
// 128/d; the RGB output stays 3) so the same topology can train at reduced
// cost. The default of 1 is the full-size network.
class Generator {
public:
    explicit Generator(int width_div = 1);

    void init_params(Rng& rng);

    // mode: train uses batch statistics in the norm layers; inference uses
    // running statistics. update_stats=false freezes the running estimates
    // (used when the generator only produces fakes for a discriminator
    // step).
    Tensor forward(const Tensor& csi, bool train, bool update_stats = true);

    // Backpropagates d(loss)/d(output); overwrites parameter gradients.
    Tensor backward(const Tensor& gy);

    std::vector<ParamRef> params();
    std::vector<ParamRef> state_tensors();  // params plus running statistics

    int width_div() const { return width_div_; }
    int hidden_units() const { return hidden_; }

private:
    int width_div_;
    int hidden_, reshape_ch_, f1_, f2_, f3_;
    DenseT<float> fc_;
    ReluT<float> relu0_, relu1_, relu2_, relu3_;
    Conv2dT<float> conv1_, conv2_, conv3_, conv4_;
    BatchNormT<float> bn1_, bn2_, bn3_;
    TanhT<float> tanh_;
    int batch_cached_ = 0;
};

// Realness discriminator:
//   4 x [3x3 stride-2 conv (32/64/128/256), batchnorm(0.8) except on the
//   first block, LeakyReLU(0.2), dropout 0.25], flatten, dense -> 1,
//   sigmoid.
class Discriminator {
public:
    explicit Discriminator(int width_div = 1);

    void init_params(Rng& rng);

    // Dropout is active whenever train is set; pass the dedicated stream.
    Tensor forward(const Tensor& images, bool train, Rng* dropout_rng,
                   bool update_stats = true);

    Tensor backward(const Tensor& gy);

    std::vector<ParamRef> params();
    std::vector<ParamRef> state_tensors();

    int width_div() const { return width_div_; }

private:
    int width_div_;
    int f1_, f2_, f3_, f4_;
    Conv2dT<float> conv1_, conv2_, conv3_, conv4_;
    BatchNormT<float> bn2_, bn3_, bn4_;
    LeakyReluT<float> lrelu1_, lrelu2_, lrelu3_, lrelu4_;
    DropoutT<float> drop1_, drop2_, drop3_, drop4_;
    DenseT<float> fc_;
    SigmoidT<float> sigmoid_;
    int batch_cached_ = 0;
};

// FNV-1a over the raw bytes of every tensor, for freeze assertions.
uint64_t hash_params(const std::vector<ParamRef>& params);

// [0,255] pixels -> [-1,1] and back (tanh output range). Denormalization
// rounds half up and clamps.
float normalize_pixel(uint8_t v);
uint8_t denormalize_pixel(float v);

}  // namespace csi2img
