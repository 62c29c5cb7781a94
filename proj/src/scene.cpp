#include "csi2img/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace csi2img {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double deg(double d) { return d * std::numbers::pi / 180.0; }

// Half-wavelength uniform linear array response.
void steering(std::vector<cdouble>& out, int n, double angle) {
    out.resize(size_t(n));
    const double k = std::numbers::pi * std::sin(angle);
    for (int i = 0; i < n; ++i) out[size_t(i)] = std::polar(1.0, k * i);
}

void add_path(CMat& h, const ChannelPath& p, int subcarrier, int n_subcarriers) {
    std::vector<cdouble> arx, atx;
    steering(arx, h.rows, p.rx_angle);
    steering(atx, h.cols, p.tx_angle);
    const cdouble g = std::polar(p.gain_mag, p.gain_phase) *
                      std::polar(1.0, -kTwoPi * subcarrier * p.delay / n_subcarriers);
    for (int r = 0; r < h.rows; ++r)
        for (int c = 0; c < h.cols; ++c) h(r, c) += g * arx[size_t(r)] * std::conj(atx[size_t(c)]);
}

}  // namespace

void Scene::validate() const {
    if (walk_t) {
        if (!slots.empty()) throw std::invalid_argument("walk scene carries no slots");
        if (*walk_t < 0.0 || *walk_t >= 1.0)
            throw std::invalid_argument("walk_t must be in [0, 1)");
    } else {
        if (slots.size() > 2) throw std::invalid_argument("at most two occupied slots");
        for (size_t i = 0; i < slots.size(); ++i) {
            if (slots[i] < 1 || slots[i] > 3) throw std::invalid_argument("slot ids are 1..3");
            if (i > 0 && slots[i] <= slots[i - 1])
                throw std::invalid_argument("slots must be ascending and distinct");
        }
    }
    if (jitter_px < -kMaxJitterPx || jitter_px > kMaxJitterPx)
        throw std::invalid_argument("jitter out of range");
}

ChannelParams ChannelParams::defaults() {
    ChannelParams p;
    p.static_paths = {
        {0.60, 0.90, deg(10.0), deg(-12.0), 0.0},
        {0.25, 2.10, deg(-22.0), deg(18.0), 2.5},
    };
    // Slots 1..3 sit at u = -1, 0, +1 of the walk parameterization.
    for (int i = 0; i < 3; ++i) {
        const double u = double(i) - 1.0;
        p.slot_paths[i].gain_mag = 1.0;
        p.slot_paths[i].gain_phase = 1.7 + 1.3 * u;
        p.slot_paths[i].rx_angle = deg(40.0) * u;
        p.slot_paths[i].tx_angle = deg(2.5) + deg(32.5) * u;
        p.slot_paths[i].delay = 10.5 + 6.5 * u;
    }
    p.noise_std = 0.05;
    return p;
}

void ChannelParams::validate() const {
    if (noise_std < 0.0) throw std::invalid_argument("noise_std must be >= 0");
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (slot_paths[i].rx_angle == slot_paths[j].rx_angle &&
                slot_paths[i].delay == slot_paths[j].delay)
                throw std::invalid_argument("slot paths must be pairwise distinct");
}

double walk_u(double t) { return -std::cos(kTwoPi * t); }

double walk_center_x(double t) { return 32.0 + 20.0 * walk_u(t); }

ChannelPath walk_path(double t, const ChannelParams& params) {
    const double u = walk_u(t);
    const ChannelPath& mid = params.slot_paths[1];
    const ChannelPath& hi = params.slot_paths[2];
    ChannelPath p;
    p.gain_mag = mid.gain_mag;
    p.gain_phase = mid.gain_phase + (hi.gain_phase - mid.gain_phase) * u;
    p.rx_angle = mid.rx_angle + (hi.rx_angle - mid.rx_angle) * u;
    p.tx_angle = mid.tx_angle + (hi.tx_angle - mid.tx_angle) * u;
    p.delay = mid.delay + (hi.delay - mid.delay) * u;
    return p;
}

Image render_scene(const Scene& scene) {
    scene.validate();
    Image img(kImageSide, kImageSide);
    for (int y = 0; y < kImageSide; ++y)
        for (int x = 0; x < kImageSide; ++x)
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = kBackgroundColor[c];

    auto draw_person = [&img](double center_x) {
        int left = int(std::lround(center_x)) - kPersonWidth / 2;
        left = std::clamp(left, 0, kImageSide - kPersonWidth);
        const int top = std::clamp(kPersonTop, 0, kImageSide - kPersonHeight);
        for (int y = top; y < top + kPersonHeight; ++y)
            for (int x = left; x < left + kPersonWidth; ++x)
                for (int c = 0; c < 3; ++c) img.at(y, x, c) = kPersonColor[c];
    };

    if (scene.walk_t) {
        draw_person(walk_center_x(*scene.walk_t) + scene.jitter_px);
    } else {
        for (const int slot : scene.slots)
            draw_person(double(kSlotCenters[slot - 1]) + scene.jitter_px);
    }
    return img;
}

CMat synth_channel(const Scene& scene, int subcarrier, const ChannelParams& params,
                   const AntennaConfig& cfg, Rng& noise_rng) {
    scene.validate();
    cfg.validate();
    if (subcarrier < 0 || subcarrier >= cfg.n_subcarriers)
        throw std::invalid_argument("subcarrier index out of range");

    CMat h(cfg.n_rx, cfg.n_tx);
    for (const auto& p : params.static_paths) add_path(h, p, subcarrier, cfg.n_subcarriers);
    if (scene.walk_t) {
        add_path(h, walk_path(*scene.walk_t, params), subcarrier, cfg.n_subcarriers);
    } else {
        for (const int slot : scene.slots)
            add_path(h, params.slot_paths[slot - 1], subcarrier, cfg.n_subcarriers);
    }
    if (params.noise_std > 0.0) {
        const double s = params.noise_std / std::sqrt(2.0);
        for (auto& e : h.a) e += cdouble(s * noise_rng.normal(), s * noise_rng.normal());
    }
    return h;
}

}  // namespace csi2img
