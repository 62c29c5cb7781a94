#include "csi2img/networks.hpp"

#include <algorithm>
#include <stdexcept>

namespace csi2img {

namespace {

int scaled(int full, int div, const char* what) {
    if (div < 1 || full % div != 0)
        throw std::invalid_argument(std::string(what) + ": width divisor " +
                                    std::to_string(div) + " does not divide " +
                                    std::to_string(full));
    return full / div;
}

}  // namespace

Generator::Generator(int width_div)
    : width_div_(width_div),
      hidden_(scaled(65536, width_div, "generator")),
      reshape_ch_(scaled(1024, width_div, "generator")),
      f1_(scaled(512, width_div, "generator")),
      f2_(scaled(256, width_div, "generator")),
      f3_(scaled(128, width_div, "generator")),
      fc_(kCsiInputDim, hidden_),
      conv1_(reshape_ch_, f1_, 1),
      conv2_(f1_, f2_, 1),
      conv3_(f2_, f3_, 1),
      conv4_(f3_, 3, 1),
      bn1_(f1_),
      bn2_(f2_),
      bn3_(f3_) {}

void Generator::init_params(Rng& rng) {
    fc_.init(rng, kInitStddev);
    conv1_.init(rng, kInitStddev);
    conv2_.init(rng, kInitStddev);
    conv3_.init(rng, kInitStddev);
    conv4_.init(rng, kInitStddev);
}

Tensor Generator::forward(const Tensor& csi, bool train, bool update_stats) {
    if (csi.rank() != 2 || csi.dim(1) != kCsiInputDim)
        throw std::invalid_argument("generator: expected (batch, 312) input");
    batch_cached_ = csi.dim(0);

    Tensor t = relu0_.forward(fc_.forward(csi, train), train);
    t = t.reshaped({batch_cached_, 8, 8, reshape_ch_});
    t = upsample2x_forward(t);
    t = relu1_.forward(bn1_.forward(conv1_.forward(t, train), train, update_stats), train);
    t = upsample2x_forward(t);
    t = relu2_.forward(bn2_.forward(conv2_.forward(t, train), train, update_stats), train);
    t = upsample2x_forward(t);
    t = relu3_.forward(bn3_.forward(conv3_.forward(t, train), train, update_stats), train);
    t = tanh_.forward(conv4_.forward(t, train), train);
    require_finite(t, "generator forward");
    return t;
}

Tensor Generator::backward(const Tensor& gy) {
    Tensor g = conv4_.backward(tanh_.backward(gy));
    g = upsample2x_backward(conv3_.backward(bn3_.backward(relu3_.backward(g))));
    g = upsample2x_backward(conv2_.backward(bn2_.backward(relu2_.backward(g))));
    g = upsample2x_backward(conv1_.backward(bn1_.backward(relu1_.backward(g))));
    g = g.reshaped({batch_cached_, hidden_});
    return fc_.backward(relu0_.backward(g));
}

std::vector<ParamRef> Generator::params() {
    return {
        {"g.fc.w", &fc_.w, &fc_.gw},
        {"g.fc.b", &fc_.b, &fc_.gb},
        {"g.conv1.w", &conv1_.w, &conv1_.gw},
        {"g.conv1.b", &conv1_.b, &conv1_.gb},
        {"g.bn1.gamma", &bn1_.gamma, &bn1_.ggamma},
        {"g.bn1.beta", &bn1_.beta, &bn1_.gbeta},
        {"g.conv2.w", &conv2_.w, &conv2_.gw},
        {"g.conv2.b", &conv2_.b, &conv2_.gb},
        {"g.bn2.gamma", &bn2_.gamma, &bn2_.ggamma},
        {"g.bn2.beta", &bn2_.beta, &bn2_.gbeta},
        {"g.conv3.w", &conv3_.w, &conv3_.gw},
        {"g.conv3.b", &conv3_.b, &conv3_.gb},
        {"g.bn3.gamma", &bn3_.gamma, &bn3_.ggamma},
        {"g.bn3.beta", &bn3_.beta, &bn3_.gbeta},
        {"g.conv4.w", &conv4_.w, &conv4_.gw},
        {"g.conv4.b", &conv4_.b, &conv4_.gb},
    };
}

std::vector<ParamRef> Generator::state_tensors() {
    auto out = params();
    out.push_back({"g.bn1.mean", &bn1_.run_mean, nullptr});
    out.push_back({"g.bn1.var", &bn1_.run_var, nullptr});
    out.push_back({"g.bn2.mean", &bn2_.run_mean, nullptr});
    out.push_back({"g.bn2.var", &bn2_.run_var, nullptr});
    out.push_back({"g.bn3.mean", &bn3_.run_mean, nullptr});
    out.push_back({"g.bn3.var", &bn3_.run_var, nullptr});
    return out;
}

Discriminator::Discriminator(int width_div)
    : width_div_(width_div),
      f1_(scaled(32, width_div, "discriminator")),
      f2_(scaled(64, width_div, "discriminator")),
      f3_(scaled(128, width_div, "discriminator")),
      f4_(scaled(256, width_div, "discriminator")),
      conv1_(3, f1_, 2),
      conv2_(f1_, f2_, 2),
      conv3_(f2_, f3_, 2),
      conv4_(f3_, f4_, 2),
      bn2_(f2_),
      bn3_(f3_),
      bn4_(f4_),
      fc_(4 * 4 * f4_, 1) {}

void Discriminator::init_params(Rng& rng) {
    conv1_.init(rng, kInitStddev);
    conv2_.init(rng, kInitStddev);
    conv3_.init(rng, kInitStddev);
    conv4_.init(rng, kInitStddev);
    fc_.init(rng, kInitStddev);
}

Tensor Discriminator::forward(const Tensor& images, bool train, Rng* dropout_rng,
                              bool update_stats) {
    if (images.rank() != 4 || images.dim(1) != 64 || images.dim(2) != 64 || images.dim(3) != 3)
        throw std::invalid_argument("discriminator: expected (batch, 64, 64, 3) input");
    batch_cached_ = images.dim(0);

    Tensor t = drop1_.forward(lrelu1_.forward(conv1_.forward(images, train), train), train,
                              dropout_rng);
    t = drop2_.forward(
        lrelu2_.forward(bn2_.forward(conv2_.forward(t, train), train, update_stats), train),
        train, dropout_rng);
    t = drop3_.forward(
        lrelu3_.forward(bn3_.forward(conv3_.forward(t, train), train, update_stats), train),
        train, dropout_rng);
    t = drop4_.forward(
        lrelu4_.forward(bn4_.forward(conv4_.forward(t, train), train, update_stats), train),
        train, dropout_rng);
    t = t.reshaped({batch_cached_, 4 * 4 * f4_});
    t = sigmoid_.forward(fc_.forward(t, train), train);
    require_finite(t, "discriminator forward");
    return t;
}

Tensor Discriminator::backward(const Tensor& gy) {
    Tensor g = fc_.backward(sigmoid_.backward(gy));
    g = g.reshaped({batch_cached_, 4, 4, f4_});
    g = conv4_.backward(bn4_.backward(lrelu4_.backward(drop4_.backward(g))));
    g = conv3_.backward(bn3_.backward(lrelu3_.backward(drop3_.backward(g))));
    g = conv2_.backward(bn2_.backward(lrelu2_.backward(drop2_.backward(g))));
    return conv1_.backward(lrelu1_.backward(drop1_.backward(g)));
}

std::vector<ParamRef> Discriminator::params() {
    return {
        {"d.conv1.w", &conv1_.w, &conv1_.gw},
        {"d.conv1.b", &conv1_.b, &conv1_.gb},
        {"d.conv2.w", &conv2_.w, &conv2_.gw},
        {"d.conv2.b", &conv2_.b, &conv2_.gb},
        {"d.bn2.gamma", &bn2_.gamma, &bn2_.ggamma},
        {"d.bn2.beta", &bn2_.beta, &bn2_.gbeta},
        {"d.conv3.w", &conv3_.w, &conv3_.gw},
        {"d.conv3.b", &conv3_.b, &conv3_.gb},
        {"d.bn3.gamma", &bn3_.gamma, &bn3_.ggamma},
        {"d.bn3.beta", &bn3_.beta, &bn3_.gbeta},
        {"d.conv4.w", &conv4_.w, &conv4_.gw},
        {"d.conv4.b", &conv4_.b, &conv4_.gb},
        {"d.bn4.gamma", &bn4_.gamma, &bn4_.ggamma},
        {"d.bn4.beta", &bn4_.beta, &bn4_.gbeta},
        {"d.fc.w", &fc_.w, &fc_.gw},
        {"d.fc.b", &fc_.b, &fc_.gb},
    };
}

std::vector<ParamRef> Discriminator::state_tensors() {
    auto out = params();
    out.push_back({"d.bn2.mean", &bn2_.run_mean, nullptr});
    out.push_back({"d.bn2.var", &bn2_.run_var, nullptr});
    out.push_back({"d.bn3.mean", &bn3_.run_mean, nullptr});
    out.push_back({"d.bn3.var", &bn3_.run_var, nullptr});
    out.push_back({"d.bn4.mean", &bn4_.run_mean, nullptr});
    out.push_back({"d.bn4.var", &bn4_.run_var, nullptr});
    return out;
}

uint64_t hash_params(const std::vector<ParamRef>& params) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& p : params) {
        const auto* bytes = reinterpret_cast<const unsigned char*>(p.value->ptr());
        const size_t n = p.value->data.size() * sizeof(float);
        for (size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

float normalize_pixel(uint8_t v) { return float(v) / 127.5f - 1.0f; }

uint8_t denormalize_pixel(float v) {
    const float x = (v + 1.0f) * 127.5f;
    return uint8_t(std::clamp(std::floor(x + 0.5f), 0.0f, 255.0f));
}

}  // namespace csi2img
