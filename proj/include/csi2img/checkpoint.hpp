#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "csi2img/adam.hpp"
#include "csi2img/networks.hpp"

namespace csi2img {

// Weight file:
//   magic "C2IWGT01", u32 tensor count,
//   per tensor: u16 name length, name bytes, u8 rank, u32 per dimension,
//   f32 data.
// An optional Adam section follows under magic "C2IADM01" with the same
// tensor layout (moment tensors named adam.<net>.{m,v}.<param>, plus a
// 1-element adam.<net>.step).
// Little-endian; running batchnorm statistics are ordinary named tensors.

struct NamedTensors {
    std::vector<std::pair<std::string, Tensor>> tensors;

    const Tensor* find(const std::string& name) const;
};

void write_checkpoint(const std::filesystem::path& path, const NamedTensors& weights,
                      const NamedTensors& adam_state);
NamedTensors read_checkpoint(const std::filesystem::path& path,
                             NamedTensors* adam_state = nullptr);

// Snapshot/restore helpers for the networks.
NamedTensors snapshot(std::vector<ParamRef> refs);
void restore(const NamedTensors& saved, std::vector<ParamRef> refs);

NamedTensors snapshot_adam(const std::string& net_prefix, const Adam& adam,
                           const std::vector<ParamRef>& params);

// Reconstructs a generator (and discriminator, when its tensors are
// present) from a checkpoint, inferring the width divisors from the stored
// shapes.
struct LoadedModel {
    std::unique_ptr<Generator> generator;
    std::unique_ptr<Discriminator> discriminator;  // null when absent
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace csi2img
