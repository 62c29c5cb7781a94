#include "csi2img/training.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "csi2img/losses.hpp"
#include "csi2img/parallel.hpp"

namespace csi2img {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void check_losses_finite(const TrainLogRecord& r) {
    for (const auto& v : {r.generator_mse, r.discriminator_bce, r.generality_bce})
        if (v && !std::isfinite(*v))
            throw std::runtime_error("non-finite loss at iteration " +
                                     std::to_string(r.iteration));
}

struct BatchView {
    Tensor csi;     // (B, 312)
    Tensor images;  // (B, 64, 64, 3), normalized to [-1, 1]
};

BatchView draw_batch(const Dataset& data, int batch_size, Rng& rng) {
    const int n = int(data.samples.size());
    BatchView b{Tensor({batch_size, kCsiInputDim}),
                Tensor({batch_size, kImageSide, kImageSide, 3})};
    for (int i = 0; i < batch_size; ++i) {
        const Sample& s = data.samples[size_t(rng.uniform_int(0, n - 1))];
        if (int(s.features.size()) != kCsiInputDim)
            throw std::invalid_argument("dataset feature length does not match network input");
        std::copy(s.features.begin(), s.features.end(), b.csi.ptr() + int64_t(i) * kCsiInputDim);
        float* dst = b.images.ptr() + int64_t(i) * kImageSide * kImageSide * 3;
        for (size_t p = 0; p < s.image.pixels.size(); ++p) dst[p] = normalize_pixel(s.image.pixels[p]);
    }
    return b;
}

Tensor noise_batch(int batch_size, Rng& rng) {
    Tensor z({batch_size, kCsiInputDim});
    for (auto& v : z.data) v = float(rng.normal());
    return z;
}

struct Trainer {
    const Dataset& data;
    const TrainConfig& cfg;
    std::filesystem::path ckpt_path;
    std::ostream* log_stream;

    Generator gen;
    std::unique_ptr<Discriminator> disc;
    Adam adam_g, adam_d;
    Rng rng_batch, rng_dropout, rng_noise;
    TrainResult result;

    Trainer(const Dataset& d, const TrainConfig& c, std::filesystem::path ckpt,
            std::ostream* log)
        : data(d),
          cfg(c),
          ckpt_path(std::move(ckpt)),
          log_stream(log),
          gen(c.g_width_div),
          rng_batch(make_stream(c.seed, kStreamBatch)),
          rng_dropout(make_stream(c.seed, kStreamDropout)),
          rng_noise(make_stream(c.seed, kStreamHybridNoise)) {
        tune_allocator();
        cfg.validate();
        if (data.samples.empty()) throw std::invalid_argument("training dataset is empty");
        Rng rg = make_stream(cfg.seed, kStreamInitGenerator);
        gen.init_params(rg);
        adam_g.bind(gen.params());
        if (cfg.mode != TrainConfig::Mode::generator_only) {
            disc = std::make_unique<Discriminator>(cfg.d_width_div);
            Rng rd = make_stream(cfg.seed, kStreamInitDiscriminator);
            disc->init_params(rd);
            adam_d.bind(disc->params());
        }
    }

    // One MSE step on the generator against the paired images.
    double generator_mse_step(const BatchView& b) {
        const Tensor pred = gen.forward(b.csi, /*train=*/true);
        auto loss = mse_loss(pred, b.images);
        gen.backward(loss.grad);
        adam_g.step(gen.params());
        return loss.value;
    }

    // One discriminator step toward `label` on the given images.
    double discriminator_step(const Tensor& images, float label) {
        const uint64_t g_hash = cfg.freeze_check ? hash_params(gen.params()) : 0;
        const Tensor prob = disc->forward(images, /*train=*/true, &rng_dropout);
        auto loss = bce_loss_const(prob, label);
        disc->backward(loss.grad);
        adam_d.step(disc->params());
        if (cfg.freeze_check && hash_params(gen.params()) != g_hash)
            throw std::logic_error("generator parameters moved during a discriminator step");
        return loss.value;
    }

    // Generality step: generator trained through the frozen discriminator
    // toward REAL. Discriminator gradients are computed but never applied,
    // and its batchnorm running statistics are left untouched.
    double generality_step(const Tensor& csi) {
        const uint64_t d_hash = cfg.freeze_check ? hash_params(disc->params()) : 0;
        const Tensor fake = gen.forward(csi, /*train=*/true);
        const Tensor prob =
            disc->forward(fake, /*train=*/true, &rng_dropout, /*update_stats=*/false);
        auto loss = bce_loss_const(prob, 1.0f);
        const Tensor g_fake = disc->backward(loss.grad);
        gen.backward(g_fake);
        adam_g.step(gen.params());
        if (cfg.freeze_check && hash_params(disc->params()) != d_hash)
            throw std::logic_error("discriminator parameters moved during a generality step");
        return loss.value;
    }

    // Fakes for a discriminator step: frozen generator, batch statistics,
    // no running-stat update.
    Tensor frozen_fakes(const Tensor& input) {
        const uint64_t g_hash = cfg.freeze_check ? hash_params(gen.params()) : 0;
        Tensor fake = gen.forward(input, /*train=*/true, /*update_stats=*/false);
        if (cfg.freeze_check && hash_params(gen.params()) != g_hash)
            throw std::logic_error("generator parameters moved while generating fakes");
        return fake;
    }

    void emit(TrainLogRecord rec) {
        check_losses_finite(rec);
        if (log_stream) *log_stream << format_log_record(rec) << '\n';
        result.log.push_back(std::move(rec));
    }

    void maybe_checkpoint(int iteration) {
        if (iteration == cfg.iterations ||
            (cfg.checkpoint_every > 0 && iteration % cfg.checkpoint_every == 0)) {
            const std::filesystem::path path =
                iteration == cfg.iterations
                    ? ckpt_path
                    : std::filesystem::path(ckpt_path.string() + ".iter" +
                                            std::to_string(iteration));
            save(path);
        }
    }

    void save(const std::filesystem::path& path) {
        NamedTensors weights = snapshot(gen.state_tensors());
        NamedTensors adam_state = snapshot_adam("g", adam_g, gen.params());
        if (disc) {
            NamedTensors dw = snapshot(disc->state_tensors());
            for (auto& t : dw.tensors) weights.tensors.push_back(std::move(t));
            NamedTensors da = snapshot_adam("d", adam_d, disc->params());
            for (auto& t : da.tensors) adam_state.tensors.push_back(std::move(t));
        }
        write_checkpoint(path, weights, adam_state);
    }

    TrainResult run() {
        for (int i = 1; i <= cfg.iterations; ++i) {
            const auto t0 = Clock::now();
            BatchView batch = draw_batch(data, cfg.batch_size, rng_batch);
            TrainLogRecord rec;
            rec.iteration = i;

            switch (cfg.mode) {
                case TrainConfig::Mode::generator_only: {
                    rec.generator_mse = generator_mse_step(batch);
                    break;
                }
                case TrainConfig::Mode::gan_only: {
                    const double d_real = discriminator_step(batch.images, 1.0f);
                    const double d_fake = discriminator_step(frozen_fakes(batch.csi), 0.0f);
                    rec.discriminator_bce = 0.5 * (d_real + d_fake);
                    rec.generality_bce = generality_step(batch.csi);
                    ++result.generality_steps;
                    break;
                }
                case TrainConfig::Mode::hybrid: {
                    rec.generator_mse = generator_mse_step(batch);
                    const double d_real = discriminator_step(batch.images, 1.0f);
                    const Tensor z = noise_batch(cfg.batch_size, rng_noise);
                    const double d_fake = discriminator_step(frozen_fakes(z), 0.0f);
                    rec.discriminator_bce = 0.5 * (d_real + d_fake);
                    if (i % cfg.generality_interval == 0) {
                        rec.generality_bce = generality_step(batch.csi);
                        ++result.generality_steps;
                    }
                    break;
                }
            }

            rec.wall_ms = ms_since(t0);
            emit(std::move(rec));
            maybe_checkpoint(i);
        }
        return std::move(result);
    }
};

}  // namespace

void TrainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("batch size must be >= 2");
    if (generality_interval < 1) throw std::invalid_argument("K must be >= 1");
}

TrainConfig::Mode mode_from_string(const std::string& s) {
    if (s == "gonly") return TrainConfig::Mode::generator_only;
    if (s == "gan") return TrainConfig::Mode::gan_only;
    if (s == "hybrid") return TrainConfig::Mode::hybrid;
    throw std::invalid_argument("unknown training mode: " + s);
}

std::string to_string(TrainConfig::Mode m) {
    switch (m) {
        case TrainConfig::Mode::generator_only: return "gonly";
        case TrainConfig::Mode::gan_only: return "gan";
        case TrainConfig::Mode::hybrid: return "hybrid";
    }
    return "?";
}

std::string format_log_record(const TrainLogRecord& r) {
    auto field = [](const std::optional<double>& v) {
        if (!v) return std::string("-");
        std::ostringstream os;
        os.precision(8);
        os << *v;
        return os.str();
    };
    std::ostringstream os;
    os << r.iteration << '\t' << field(r.generator_mse) << '\t' << field(r.discriminator_bce)
       << '\t' << field(r.generality_bce) << '\t';
    os.precision(3);
    os << std::fixed << r.wall_ms;
    return os.str();
}

TrainResult train_generator_only(const Dataset& data, const TrainConfig& cfg,
                                 const std::filesystem::path& ckpt_path,
                                 std::ostream* log_stream) {
    if (cfg.mode != TrainConfig::Mode::generator_only)
        throw std::invalid_argument("train_generator_only: wrong mode in config");
    return Trainer(data, cfg, ckpt_path, log_stream).run();
}

TrainResult train_gan_only(const Dataset& data, const TrainConfig& cfg,
                           const std::filesystem::path& ckpt_path, std::ostream* log_stream) {
    if (cfg.mode != TrainConfig::Mode::gan_only)
        throw std::invalid_argument("train_gan_only: wrong mode in config");
    return Trainer(data, cfg, ckpt_path, log_stream).run();
}

TrainResult train_hybrid(const Dataset& data, const TrainConfig& cfg,
                         const std::filesystem::path& ckpt_path, std::ostream* log_stream) {
    if (cfg.mode != TrainConfig::Mode::hybrid)
        throw std::invalid_argument("train_hybrid: wrong mode in config");
    return Trainer(data, cfg, ckpt_path, log_stream).run();
}

std::vector<Image> generate_images(Generator& gen, const std::vector<const float*>& csi,
                                   int feature_length) {
    if (feature_length != kCsiInputDim)
        throw std::invalid_argument("generate_images: feature length mismatch");
    std::vector<Image> out;
    out.reserve(csi.size());
    const int chunk = 32;
    for (size_t start = 0; start < csi.size(); start += chunk) {
        const int b = int(std::min<size_t>(chunk, csi.size() - start));
        Tensor x({b, kCsiInputDim});
        for (int i = 0; i < b; ++i)
            std::copy(csi[start + i], csi[start + i] + kCsiInputDim,
                      x.ptr() + int64_t(i) * kCsiInputDim);
        const Tensor y = gen.forward(x, /*train=*/false);
        for (int i = 0; i < b; ++i) {
            Image img(kImageSide, kImageSide);
            const float* src = y.ptr() + int64_t(i) * kImageSide * kImageSide * 3;
            for (size_t p = 0; p < img.pixels.size(); ++p)
                img.pixels[p] = denormalize_pixel(src[p]);
            out.push_back(std::move(img));
        }
    }
    return out;
}

std::vector<Image> generate_images(Generator& gen, const Dataset& data) {
    std::vector<const float*> ptrs;
    ptrs.reserve(data.samples.size());
    for (const auto& s : data.samples) ptrs.push_back(s.features.data());
    return generate_images(gen, ptrs, data.feature_length);
}

}  // namespace csi2img
