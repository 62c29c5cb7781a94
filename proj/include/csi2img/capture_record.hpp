#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "csi2img/csi_codec.hpp"

namespace csi2img {

// Capture-record file: the ingestion path for compressed-CSI captures.
//
//   magic "C2IANG01"
//   u16 M (rx), u16 N (tx), u16 n_subcarriers, u8 b_phi, u8 b_psi
//   per frame: u64 timestamp_us, then per subcarrier the quantizer indices
//   in AngleSet order (all phi, then all psi), one byte each.
//
// Little-endian throughout.
struct CaptureFrame {
    uint64_t timestamp_us = 0;
    std::vector<QuantizedAngleRecord> subcarriers;  // one per subcarrier
};

struct CaptureFile {
    AntennaConfig config;
    int b_phi = 6;
    int b_psi = 4;
    std::vector<CaptureFrame> frames;
};

void write_capture_file(const std::filesystem::path& path, const CaptureFile& capture);
CaptureFile read_capture_file(const std::filesystem::path& path);

}  // namespace csi2img
