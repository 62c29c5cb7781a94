#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "csi2img/binary_io.hpp"
#include "csi2img/checkpoint.hpp"

using namespace csi2img;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("ckpt_test_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<char> file_bytes(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::vector<char>(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("generator checkpoint round trip preserves every tensor") {
    TempDir tmp;
    Generator gen(32);
    Rng init = make_stream(3, kStreamInitGenerator);
    gen.init_params(init);
    const uint64_t h_before = hash_params(gen.state_tensors());

    const fs::path file = tmp.path / "g.ckpt";
    write_checkpoint(file, snapshot(gen.state_tensors()), {});

    LoadedModel model = load_model(file);
    REQUIRE(model.generator != nullptr);
    CHECK(model.discriminator == nullptr);
    CHECK(model.generator->width_div() == 32);
    CHECK(hash_params(model.generator->state_tensors()) == h_before);

    // same content -> same bytes
    const fs::path file2 = tmp.path / "g2.ckpt";
    write_checkpoint(file2, snapshot(gen.state_tensors()), {});
    CHECK(file_bytes(file) == file_bytes(file2));
}

TEST_CASE("generator+discriminator checkpoint with adam state") {
    TempDir tmp;
    Generator gen(32);
    Discriminator disc(4);
    Rng gi = make_stream(4, kStreamInitGenerator), di = make_stream(4, kStreamInitDiscriminator);
    gen.init_params(gi);
    disc.init_params(di);
    Adam adam_g;
    adam_g.bind(gen.params());
    adam_g.step_count = 17;

    NamedTensors weights = snapshot(gen.state_tensors());
    for (auto& t : snapshot(disc.state_tensors()).tensors) weights.tensors.push_back(t);
    const fs::path file = tmp.path / "gan.ckpt";
    write_checkpoint(file, weights, snapshot_adam("g", adam_g, gen.params()));

    NamedTensors adam_back;
    (void)read_checkpoint(file, &adam_back);
    const Tensor* step = adam_back.find("adam.g.step");
    REQUIRE(step != nullptr);
    CHECK(step->data[0] == 17.0f);

    LoadedModel model = load_model(file);
    REQUIRE(model.discriminator != nullptr);
    CHECK(model.discriminator->width_div() == 4);
    CHECK(hash_params(model.discriminator->state_tensors()) ==
          hash_params(disc.state_tensors()));
}

TEST_CASE("missing tensor names the offender") {
    TempDir tmp;
    Generator gen(32);
    Rng init = make_stream(5, kStreamInitGenerator);
    gen.init_params(init);
    NamedTensors weights = snapshot(gen.state_tensors());
    weights.tensors.erase(weights.tensors.begin() + 3);  // drop g.fc down the list
    const fs::path file = tmp.path / "partial.ckpt";
    write_checkpoint(file, weights, {});
    try {
        (void)load_model(file);
        FAIL("expected format_error");
    } catch (const format_error& e) {
        CHECK(std::string(e.what()).find("g.") != std::string::npos);
    }
}

TEST_CASE("corrupt and truncated files are rejected with context") {
    TempDir tmp;
    const fs::path bogus = tmp.path / "bogus.ckpt";
    std::ofstream(bogus, std::ios::binary) << "XXXXXXXXjunk";
    CHECK_THROWS_AS((void)read_checkpoint(bogus), format_error);

    Generator gen(32);
    Rng init = make_stream(6, kStreamInitGenerator);
    gen.init_params(init);
    const fs::path file = tmp.path / "trunc.ckpt";
    write_checkpoint(file, snapshot(gen.state_tensors()), {});
    fs::resize_file(file, fs::file_size(file) / 2);
    CHECK_THROWS_AS((void)read_checkpoint(file), format_error);
}
