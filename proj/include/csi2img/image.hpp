#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace csi2img {

// 8-bit RGB image, row-major (y, x, channel).
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(size_t(w) * size_t(h) * 3, 0) {}

    uint8_t& at(int y, int x, int c) { return pixels[(size_t(y) * width + x) * 3 + c]; }
    const uint8_t& at(int y, int x, int c) const {
        return pixels[(size_t(y) * width + x) * 3 + c];
    }

    bool operator==(const Image& other) const = default;
};

void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);

}  // namespace csi2img
