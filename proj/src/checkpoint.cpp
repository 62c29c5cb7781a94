#include "csi2img/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "csi2img/binary_io.hpp"

namespace csi2img {

namespace {
constexpr char kWeightMagic[] = "C2IWGT01";
constexpr char kAdamMagic[] = "C2IADM01";

void write_section(std::ofstream& os, const char* magic, const NamedTensors& ts) {
    io::put_bytes(os, magic, 8);
    io::put_le<uint32_t>(os, uint32_t(ts.tensors.size()));
    std::vector<unsigned char> buf;
    for (const auto& [name, tensor] : ts.tensors) {
        io::put_le<uint16_t>(os, uint16_t(name.size()));
        io::put_bytes(os, name.data(), name.size());
        io::put_le<uint8_t>(os, uint8_t(tensor.rank()));
        for (const int d : tensor.shape) io::put_le<uint32_t>(os, uint32_t(d));
        buf.resize(tensor.data.size() * 4);
        for (size_t i = 0; i < tensor.data.size(); ++i) {
            uint32_t u;
            std::memcpy(&u, &tensor.data[i], 4);
            buf[i * 4 + 0] = (unsigned char)(u & 0xff);
            buf[i * 4 + 1] = (unsigned char)((u >> 8) & 0xff);
            buf[i * 4 + 2] = (unsigned char)((u >> 16) & 0xff);
            buf[i * 4 + 3] = (unsigned char)((u >> 24) & 0xff);
        }
        io::put_bytes(os, buf.data(), buf.size());
    }
}

NamedTensors read_section(std::ifstream& is, const std::string& ctx) {
    NamedTensors out;
    const uint32_t count = io::get_le<uint32_t>(is, ctx);
    out.tensors.reserve(count);
    for (uint32_t t = 0; t < count; ++t) {
        const uint16_t name_len = io::get_le<uint16_t>(is, ctx);
        std::string name(name_len, '\0');
        io::read_exact(is, name.data(), name_len, ctx);
        const uint8_t rank = io::get_le<uint8_t>(is, ctx);
        if (rank < 1 || rank > 4)
            throw format_error(ctx + ": tensor '" + name + "' has unsupported rank " +
                               std::to_string(int(rank)));
        std::vector<int> shape(rank);
        for (auto& d : shape) {
            d = int(io::get_le<uint32_t>(is, ctx));
            if (d < 1 || d > (1 << 26))
                throw format_error(ctx + ": tensor '" + name + "' has bad dimension");
        }
        Tensor tensor(shape);
        std::vector<unsigned char> buf(tensor.data.size() * 4);
        io::read_exact(is, buf.data(), buf.size(), ctx + " tensor '" + name + "'");
        for (size_t i = 0; i < tensor.data.size(); ++i) {
            const uint32_t u = uint32_t(buf[i * 4 + 0]) | (uint32_t(buf[i * 4 + 1]) << 8) |
                               (uint32_t(buf[i * 4 + 2]) << 16) | (uint32_t(buf[i * 4 + 3]) << 24);
            std::memcpy(&tensor.data[i], &u, 4);
        }
        out.tensors.emplace_back(std::move(name), std::move(tensor));
    }
    return out;
}

}  // namespace

const Tensor* NamedTensors::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void write_checkpoint(const std::filesystem::path& path, const NamedTensors& weights,
                      const NamedTensors& adam_state) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_section(os, kWeightMagic, weights);
    if (!adam_state.tensors.empty()) write_section(os, kAdamMagic, adam_state);
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

NamedTensors read_checkpoint(const std::filesystem::path& path, NamedTensors* adam_state) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const std::string ctx = path.string();
    io::expect_magic(is, kWeightMagic, ctx);
    NamedTensors weights = read_section(is, ctx);
    is.peek();
    if (!is.eof()) {
        io::expect_magic(is, kAdamMagic, ctx);
        NamedTensors adam = read_section(is, ctx);
        if (adam_state) *adam_state = std::move(adam);
    }
    return weights;
}

NamedTensors snapshot(std::vector<ParamRef> refs) {
    NamedTensors out;
    out.tensors.reserve(refs.size());
    for (const auto& r : refs) out.tensors.emplace_back(r.name, *r.value);
    return out;
}

void restore(const NamedTensors& saved, std::vector<ParamRef> refs) {
    for (auto& r : refs) {
        const Tensor* t = saved.find(r.name);
        if (!t) throw format_error("checkpoint is missing tensor '" + r.name + "'");
        if (!t->same_shape(*r.value))
            throw format_error("checkpoint tensor '" + r.name + "' has wrong shape");
        *r.value = *t;
    }
}

NamedTensors snapshot_adam(const std::string& net_prefix, const Adam& adam,
                           const std::vector<ParamRef>& params) {
    NamedTensors out;
    Tensor step({1});
    step.data[0] = float(adam.step_count);
    out.tensors.emplace_back("adam." + net_prefix + ".step", std::move(step));
    for (size_t i = 0; i < params.size(); ++i) {
        out.tensors.emplace_back("adam." + net_prefix + ".m." + params[i].name, adam.m[i]);
        out.tensors.emplace_back("adam." + net_prefix + ".v." + params[i].name, adam.v[i]);
    }
    return out;
}

LoadedModel load_model(const std::filesystem::path& path) {
    const NamedTensors weights = read_checkpoint(path);

    const Tensor* gfc = weights.find("g.fc.w");
    if (!gfc) throw format_error(path.string() + ": missing tensor 'g.fc.w'");
    if (gfc->rank() != 2 || gfc->dim(0) != kCsiInputDim)
        throw format_error(path.string() + ": tensor 'g.fc.w' has unexpected shape");
    const int hidden = gfc->dim(1);
    if (hidden < 1 || 65536 % hidden != 0)
        throw format_error(path.string() + ": tensor 'g.fc.w' width is not a divisor of 65536");

    LoadedModel out;
    out.generator = std::make_unique<Generator>(65536 / hidden);
    restore(weights, out.generator->state_tensors());

    if (const Tensor* dconv = weights.find("d.conv1.w")) {
        if (dconv->rank() != 2 || dconv->dim(0) != 27 || 32 % dconv->dim(1) != 0)
            throw format_error(path.string() + ": tensor 'd.conv1.w' has unexpected shape");
        out.discriminator = std::make_unique<Discriminator>(32 / dconv->dim(1));
        restore(weights, out.discriminator->state_tensors());
    }
    return out;
}

}  // namespace csi2img
