#include "csi2img/capture_record.hpp"

#include <fstream>

#include "csi2img/binary_io.hpp"

namespace csi2img {

namespace {
constexpr char kMagic[] = "C2IANG01";
}

void write_capture_file(const std::filesystem::path& path, const CaptureFile& capture) {
    capture.config.validate();
    const int n_angles = angle_count(capture.config);

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");

    io::put_bytes(os, kMagic, 8);
    io::put_le<uint16_t>(os, uint16_t(capture.config.n_rx));
    io::put_le<uint16_t>(os, uint16_t(capture.config.n_tx));
    io::put_le<uint16_t>(os, uint16_t(capture.config.n_subcarriers));
    io::put_le<uint8_t>(os, uint8_t(capture.b_phi));
    io::put_le<uint8_t>(os, uint8_t(capture.b_psi));

    for (const auto& frame : capture.frames) {
        if (int(frame.subcarriers.size()) != capture.config.n_subcarriers)
            throw std::invalid_argument("capture frame has wrong subcarrier count");
        io::put_le<uint64_t>(os, frame.timestamp_us);
        for (const auto& rec : frame.subcarriers) {
            if (int(rec.phi_indices.size()) != n_angles || int(rec.psi_indices.size()) != n_angles)
                throw std::invalid_argument("capture record has wrong angle count");
            for (const uint16_t i : rec.phi_indices) {
                if (i >= (1u << capture.b_phi))
                    throw std::invalid_argument("phi index exceeds bit width");
                io::put_le<uint8_t>(os, uint8_t(i));
            }
            for (const uint16_t i : rec.psi_indices) {
                if (i >= (1u << capture.b_psi))
                    throw std::invalid_argument("psi index exceeds bit width");
                io::put_le<uint8_t>(os, uint8_t(i));
            }
        }
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

CaptureFile read_capture_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const std::string ctx = path.string();

    io::expect_magic(is, kMagic, ctx);
    CaptureFile out;
    out.config.n_rx = io::get_le<uint16_t>(is, ctx);
    out.config.n_tx = io::get_le<uint16_t>(is, ctx);
    out.config.n_subcarriers = io::get_le<uint16_t>(is, ctx);
    out.b_phi = io::get_le<uint8_t>(is, ctx);
    out.b_psi = io::get_le<uint8_t>(is, ctx);
    out.config.validate();
    if (out.b_phi != 4 && out.b_phi != 6) throw format_error(ctx + ": unsupported phi bit width");
    if (out.b_psi != 2 && out.b_psi != 4) throw format_error(ctx + ": unsupported psi bit width");
    const int n_angles = angle_count(out.config);

    while (true) {
        is.peek();
        if (is.eof()) break;
        CaptureFrame frame;
        frame.timestamp_us = io::get_le<uint64_t>(is, ctx);
        frame.subcarriers.resize(size_t(out.config.n_subcarriers));
        for (auto& rec : frame.subcarriers) {
            rec.b_phi = out.b_phi;
            rec.b_psi = out.b_psi;
            rec.phi_indices.resize(size_t(n_angles));
            rec.psi_indices.resize(size_t(n_angles));
            for (auto& i : rec.phi_indices) {
                i = io::get_le<uint8_t>(is, ctx);
                if (i >= (1u << out.b_phi))
                    throw format_error(ctx + ": phi index out of range at byte " +
                                       std::to_string(long(is.tellg()) - 1));
            }
            for (auto& i : rec.psi_indices) {
                i = io::get_le<uint8_t>(is, ctx);
                if (i >= (1u << out.b_psi))
                    throw format_error(ctx + ": psi index out of range at byte " +
                                       std::to_string(long(is.tellg()) - 1));
            }
        }
        out.frames.push_back(std::move(frame));
    }
    return out;
}

}  // namespace csi2img
