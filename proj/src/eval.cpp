#include "csi2img/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

namespace csi2img {

double ssim(const Image& x, const Image& y) {
    if (x.width != y.width || x.height != y.height)
        throw std::invalid_argument("ssim: image dimensions differ");
    const int n = x.width * x.height;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double mx = 0.0, my = 0.0;
        for (int i = 0; i < n; ++i) {
            mx += x.pixels[size_t(i) * 3 + c];
            my += y.pixels[size_t(i) * 3 + c];
        }
        mx /= n;
        my /= n;
        double vx = 0.0, vy = 0.0, cov = 0.0;
        for (int i = 0; i < n; ++i) {
            const double dx = x.pixels[size_t(i) * 3 + c] - mx;
            const double dy = y.pixels[size_t(i) * 3 + c] - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
        vx /= n;
        vy /= n;
        cov /= n;
        total += ((2.0 * mx * my + SsimParams::kC1) * (2.0 * cov + SsimParams::kC2)) /
                 ((mx * mx + my * my + SsimParams::kC1) * (vx + vy + SsimParams::kC2));
    }
    return total / 3.0;
}

namespace {

std::vector<uint8_t> foreground_mask(const Image& img) {
    const int w = img.width, h = img.height;
    std::vector<uint8_t> mask(size_t(w) * h, 0);
    const double thr2 = 60.0 * 60.0;
    for (int i = 0; i < w * h; ++i) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double d = double(img.pixels[size_t(i) * 3 + c]) - double(kPersonColor[c]);
            d2 += d * d;
        }
        mask[size_t(i)] = d2 <= thr2 ? 1 : 0;
    }
    return mask;
}

std::vector<uint8_t> dilate3x3(const std::vector<uint8_t>& in, int w, int h) {
    std::vector<uint8_t> out(in.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            uint8_t v = 0;
            for (int dy = -1; dy <= 1 && !v; ++dy)
                for (int dx = -1; dx <= 1 && !v; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy >= 0 && yy < h && xx >= 0 && xx < w && in[size_t(yy) * w + xx]) v = 1;
                }
            out[size_t(y) * w + x] = v;
        }
    return out;
}

std::vector<uint8_t> erode3x3(const std::vector<uint8_t>& in, int w, int h) {
    std::vector<uint8_t> out(in.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            uint8_t v = 1;
            for (int dy = -1; dy <= 1 && v; ++dy)
                for (int dx = -1; dx <= 1 && v; ++dx) {
                    const int yy = y + dy, xx = x + dx;
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w || !in[size_t(yy) * w + xx]) v = 0;
                }
            out[size_t(y) * w + x] = v;
        }
    return out;
}

}  // namespace

std::vector<DetectionBox> detect_users(const Image& img) {
    if (img.width != kImageSide || img.height != kImageSide)
        throw std::invalid_argument("detect_users: expected a 64x64 image");
    const int w = img.width, h = img.height;
    std::vector<uint8_t> mask = erode3x3(dilate3x3(foreground_mask(img), w, h), w, h);

    std::vector<int> label(size_t(w) * h, -1);
    std::vector<DetectionBox> boxes;
    std::vector<int> stack;
    for (int start = 0; start < w * h; ++start) {
        if (!mask[size_t(start)] || label[size_t(start)] >= 0) continue;
        const int id = int(boxes.size());
        int area = 0, min_x = w, max_x = -1, min_y = h, max_y = -1;
        stack.assign(1, start);
        label[size_t(start)] = id;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int y = p / w, x = p % w;
            ++area;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
            const int neigh[4] = {p - w, p + w, p - 1, p + 1};
            const bool ok[4] = {y > 0, y < h - 1, x > 0, x < w - 1};
            for (int k = 0; k < 4; ++k) {
                if (!ok[k]) continue;
                const int q = neigh[k];
                if (mask[size_t(q)] && label[size_t(q)] < 0) {
                    label[size_t(q)] = id;
                    stack.push_back(q);
                }
            }
        }
        if (area < 48) continue;
        DetectionBox b;
        b.left = min_x;
        b.top = min_y;
        b.width = max_x - min_x + 1;
        b.height = max_y - min_y + 1;
        b.confidence = double(area) / (double(b.width) * double(b.height));
        boxes.push_back(b);
    }
    std::erase_if(boxes, [](const DetectionBox& b) { return b.confidence < 0.3; });
    std::sort(boxes.begin(), boxes.end(),
              [](const DetectionBox& a, const DetectionBox& b) { return a.left < b.left; });
    return boxes;
}

bool position_match(const std::vector<DetectionBox>& boxes, const Scene& truth) {
    if (truth.walk_t) throw std::invalid_argument("position_match: slot scenes only");
    if (boxes.size() != truth.slots.size()) return false;
    std::multiset<int> implied;
    for (const auto& b : boxes) {
        int slot = 0;
        double best = 1e9;
        for (int s = 0; s < 3; ++s) {
            const double d = std::fabs(b.center_x() - kSlotCenters[s]);
            if (d < best) {
                best = d;
                slot = s + 1;
            }
        }
        if (best > 10.0) return false;
        implied.insert(slot);
    }
    return implied == std::multiset<int>(truth.slots.begin(), truth.slots.end());
}

MetricsReport evaluate(const std::vector<Image>& generated, const Dataset& truth,
                       const std::string& split) {
    if (generated.size() != truth.samples.size())
        throw std::invalid_argument("evaluate: one generated image per truth sample required");

    MetricsReport r;
    r.n_samples = int(truth.samples.size());
    r.split = split;

    int success = 0, correct = 0;
    double conf_sum = 0.0;
    int conf_n = 0;
    double ssim_sum = 0.0;
    double err_sum = 0.0, err_max = 0.0;
    int err_n = 0;

    for (size_t i = 0; i < truth.samples.size(); ++i) {
        const Sample& s = truth.samples[i];
        const Scene scene = s.scene_truth(truth.walk);
        const auto boxes = detect_users(generated[i]);
        const bool detected = int(boxes.size()) == scene.user_count();

        ssim_sum += ssim(s.image, generated[i]);
        if (detected) {
            ++success;
            if (!boxes.empty()) {  // an empty scene detected as empty has no confidence
                double c = 0.0;
                for (const auto& b : boxes) c += b.confidence;
                conf_sum += c / double(boxes.size());
                ++conf_n;
            }
        }
        if (truth.walk) {
            if (detected) {
                const auto truth_boxes = detect_users(s.image);
                if (truth_boxes.size() == 1) {
                    const double e = std::fabs(double(boxes[0].left) - double(truth_boxes[0].left));
                    err_sum += e;
                    err_max = std::max(err_max, e);
                    ++err_n;
                }
            }
        } else {
            if (position_match(boxes, scene)) ++correct;
        }
    }

    const int n = r.n_samples;
    r.detection_success_rate = n ? double(success) / n : 0.0;
    r.mean_ssim = n ? ssim_sum / n : 0.0;
    if (conf_n) {
        r.mean_confidence = conf_sum / conf_n;
    } else {
        r.undefined_flags.push_back("mean_confidence");
    }
    if (truth.walk) {
        r.undefined_flags.push_back("position_accuracy");
        if (err_n) {
            r.pixel_error_mean = err_sum / err_n;
            r.pixel_error_max = err_max;
        } else {
            r.undefined_flags.push_back("pixel_error_mean");
            r.undefined_flags.push_back("pixel_error_max");
        }
    } else {
        r.position_accuracy = n ? double(correct) / n : 0.0;
        r.undefined_flags.push_back("pixel_error_mean");
        r.undefined_flags.push_back("pixel_error_max");
    }
    return r;
}

std::string report_to_json(const MetricsReport& r, const std::string& config_json) {
    nlohmann::json j;
    j["detection_success_rate"] = r.detection_success_rate;
    j["mean_confidence"] = r.mean_confidence;
    j["mean_ssim"] = r.mean_ssim;
    j["position_accuracy"] = r.position_accuracy;
    j["pixel_error_mean"] = r.pixel_error_mean;
    j["pixel_error_max"] = r.pixel_error_max;
    j["n_samples"] = r.n_samples;
    j["split"] = r.split;
    j["undefined_flags"] = r.undefined_flags;
    if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
    return j.dump(2);
}

void write_report(const std::filesystem::path& path, const MetricsReport& r,
                  const std::string& config_json) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << report_to_json(r, config_json) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace csi2img
