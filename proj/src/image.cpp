#include "csi2img/image.hpp"

#include <fstream>
#include <string>

#include "csi2img/binary_io.hpp"

namespace csi2img {

void write_ppm(const std::filesystem::path& path, const Image& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(img.pixels.data()),
             std::streamsize(img.pixels.size()));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    is >> magic >> w >> h >> maxval;
    if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255)
        throw format_error(path.string() + ": not a P6/255 ppm");
    is.get();  // single whitespace after header
    Image img(w, h);
    is.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
    if (size_t(is.gcount()) != img.pixels.size())
        throw format_error(path.string() + ": truncated pixel data");
    return img;
}

}  // namespace csi2img
