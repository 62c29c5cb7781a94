#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csi2img/dataset.hpp"
#include "csi2img/image.hpp"

namespace csi2img {

// SSIM constants for 8-bit dynamic range.
struct SsimParams {
    static constexpr double kK1 = 0.01;
    static constexpr double kK2 = 0.03;
    static constexpr double kC1 = (255.0 * kK1) * (255.0 * kK1);  // 6.5025
    static constexpr double kC2 = (255.0 * kK2) * (255.0 * kK2);  // 58.5225
};

// Global single-window SSIM per channel (population statistics over all
// pixels of the channel), averaged across the three channels. Identical
// images score exactly 1.
double ssim(const Image& x, const Image& y);

struct DetectionBox {
    int left = 0;
    int top = 0;
    int width = 0;
    int height = 0;
    double confidence = 0.0;  // component area / box area

    double center_x() const { return left + width / 2.0; }
};

// Color-distance detector co-designed with the renderer: pixels within
// Euclidean RGB distance 60 of the person color are foreground, a 3x3
// morphological closing bridges single-pixel gaps, 4-connected components
// of at least 48 px become boxes, and boxes below confidence 0.3 are
// dropped. Output is sorted by left coordinate.
std::vector<DetectionBox> detect_users(const Image& img);

// True iff every box lands within +-10 px of a distinct slot center and
// the implied slot set equals the truth.
bool position_match(const std::vector<DetectionBox>& boxes, const Scene& truth);

struct MetricsReport {
    double detection_success_rate = 0.0;
    double mean_confidence = 0.0;
    double mean_ssim = 0.0;
    double position_accuracy = 0.0;
    double pixel_error_mean = 0.0;
    double pixel_error_max = 0.0;
    int n_samples = 0;
    std::string split;
    // Names of fields whose mean had no contributing samples; such fields
    // read 0 instead of aborting the evaluation.
    std::vector<std::string> undefined_flags;
};

// Pairs generated[i] with truth.samples[i]. Slot scenarios score position
// accuracy; the walk scenario scores the left-coordinate pixel error over
// successfully detected samples.
MetricsReport evaluate(const std::vector<Image>& generated, const Dataset& truth,
                       const std::string& split);

std::string report_to_json(const MetricsReport& r, const std::string& config_json = "");
void write_report(const std::filesystem::path& path, const MetricsReport& r,
                  const std::string& config_json = "");

}  // namespace csi2img
