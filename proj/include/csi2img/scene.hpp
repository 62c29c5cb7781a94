#pragma once

#include <optional>
#include <vector>

#include "csi2img/cmat.hpp"
#include "csi2img/csi_codec.hpp"
#include "csi2img/image.hpp"
#include "csi2img/rng.hpp"

namespace csi2img {

// Image geometry shared by the renderer and the detector.
inline constexpr int kImageSide = 64;
inline constexpr int kPersonWidth = 12;
inline constexpr int kPersonHeight = 28;
inline constexpr int kPersonTop = 22;
inline constexpr int kSlotCenters[3] = {12, 32, 52};
inline constexpr uint8_t kBackgroundColor[3] = {200, 200, 200};
inline constexpr uint8_t kPersonColor[3] = {150, 30, 30};
inline constexpr int kMaxJitterPx = 2;

// One scene: up to two users at discrete slots, or one user on the
// continuous walk path parameterized by t in [0, 1).
struct Scene {
    std::vector<int> slots;          // subset of {1, 2, 3}, ascending
    std::optional<double> walk_t;    // set iff walk scenario
    int jitter_px = 0;               // horizontal offset, [-2, 2]

    void validate() const;
    int user_count() const { return walk_t ? 1 : int(slots.size()); }
};

// Geometric channel: a fixed static component plus one scatterer path per
// occupied slot, with per-subcarrier delay phase and optional complex
// Gaussian noise. The walk scenario interpolates the slot parameters
// continuously around the path.
struct ChannelPath {
    double gain_mag = 1.0;
    double gain_phase = 0.0;
    double rx_angle = 0.0;   // radians
    double tx_angle = 0.0;   // radians
    double delay = 0.0;      // in subcarrier-spacing units
};

struct ChannelParams {
    std::vector<ChannelPath> static_paths;
    ChannelPath slot_paths[3];
    double noise_std = 0.05;

    static ChannelParams defaults();
    void validate() const;
};

// Continuous-walk interpolation parameter: u(t) = -cos(2 pi t), so u sweeps
// -1 (slot 1 geometry) through 0 (slot 2) to +1 (slot 3) and back, once per
// period.
double walk_u(double t);

// Horizontal center of the person on the image for the walk path.
double walk_center_x(double t);

ChannelPath walk_path(double t, const ChannelParams& params);

Image render_scene(const Scene& scene);

// Channel matrix for one subcarrier: n_rx x n_tx (3x2 by default).
CMat synth_channel(const Scene& scene, int subcarrier, const ChannelParams& params,
                   const AntennaConfig& cfg, Rng& noise_rng);

}  // namespace csi2img
