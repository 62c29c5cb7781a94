#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csi2img/dataset.hpp"
#include "csi2img/eval.hpp"
#include "csi2img/parallel.hpp"
#include "csi2img/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace csi2img;

namespace {

// Files created by the running subcommand; removed if it fails so a nonzero
// exit never leaves partial artifacts behind.
std::vector<fs::path> g_created;

void track(const fs::path& p) { g_created.push_back(p); }

void cleanup_partial() {
    for (const auto& p : g_created) {
        std::error_code ec;
        fs::remove(p, ec);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

struct GenDataArgs {
    std::string scenario;
    int n_train = -1;
    int n_test = -1;
    uint64_t seed = kDefaultSeed;
    std::string out_dir;
    double noise_std = 0.05;
};

int run_gen_data(const GenDataArgs& a) {
    const Scenario scenario = scenario_from_string(a.scenario);
    const int n_train = a.n_train > 0 ? a.n_train : default_train_count(scenario);
    const int n_test = a.n_test > 0 ? a.n_test : default_test_count(scenario);
    ChannelParams params = ChannelParams::defaults();
    params.noise_std = a.noise_std;

    const fs::path out(a.out_dir);
    fs::create_directories(out);
    track(out / "train.bin");
    track(out / "test.bin");
    track(out / "manifest.json");
    const GenStats stats = gen_dataset(scenario, n_train, n_test, a.seed, out, params);

    json manifest;
    manifest["command"] = "gen-data";
    manifest["scenario"] = a.scenario;
    manifest["n_train"] = n_train;
    manifest["n_test"] = n_test;
    manifest["seed"] = a.seed;
    manifest["noise_std"] = a.noise_std;
    manifest["b_phi"] = 6;
    manifest["b_psi"] = 4;
    manifest["threads"] = thread_count();
    manifest["class_separation"] = stats.class_separation;
    manifest["train_class_counts"] = stats.train_class_counts;
    manifest["test_class_counts"] = stats.test_class_counts;
    write_text(out / "manifest.json", manifest.dump(2) + "\n");

    std::cerr << "gen-data: wrote " << n_train << "/" << n_test << " samples to " << out
              << " (class separation " << stats.class_separation << ")\n";
    return 0;
}

struct TrainArgs {
    std::string mode;
    int iters = 32000;
    int batch = 32;
    int k = 8;
    std::string data_dir;
    std::string ckpt;
    uint64_t seed = kDefaultSeed;
    int gdiv = 1;
    int ddiv = 1;
    std::string log_path;
    int ckpt_every = 1000;
};

json train_config_json(const TrainArgs& a) {
    json j;
    j["command"] = "train";
    j["mode"] = a.mode;
    j["iters"] = a.iters;
    j["batch"] = a.batch;
    j["k"] = a.k;
    j["data"] = a.data_dir;
    j["ckpt"] = a.ckpt;
    j["seed"] = a.seed;
    j["gdiv"] = a.gdiv;
    j["ddiv"] = a.ddiv;
    j["ckpt_every"] = a.ckpt_every;
    j["threads"] = thread_count();
    return j;
}

int run_train(const TrainArgs& a) {
    const Dataset data = load_dataset(fs::path(a.data_dir) / "train.bin");

    TrainConfig cfg;
    cfg.mode = mode_from_string(a.mode);
    cfg.iterations = a.iters;
    cfg.batch_size = a.batch;
    cfg.generality_interval = a.k;
    cfg.seed = a.seed;
    cfg.checkpoint_every = a.ckpt_every;
    cfg.g_width_div = a.gdiv;
    cfg.d_width_div = a.ddiv;

    const fs::path ckpt(a.ckpt);
    if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
    const fs::path log_path = a.log_path.empty() ? fs::path(a.ckpt + ".log") : fs::path(a.log_path);
    const json config = train_config_json(a);

    std::ofstream log(log_path);
    if (!log) throw std::runtime_error("cannot open " + log_path.string() + " for writing");
    track(ckpt);
    track(log_path);
    track(ckpt.string() + ".manifest.json");
    for (const auto& [key, value] : config.items())
        log << "# " << key << "=" << value.dump() << "\n";

    TrainResult result;
    switch (cfg.mode) {
        case TrainConfig::Mode::generator_only:
            result = train_generator_only(data, cfg, ckpt, &log);
            break;
        case TrainConfig::Mode::gan_only:
            result = train_gan_only(data, cfg, ckpt, &log);
            break;
        case TrainConfig::Mode::hybrid:
            result = train_hybrid(data, cfg, ckpt, &log);
            break;
    }
    write_text(ckpt.string() + ".manifest.json", config.dump(2) + "\n");

    std::cerr << "train: " << a.iters << " iterations done, " << result.generality_steps
              << " generality steps, checkpoint " << ckpt << "\n";
    return 0;
}

struct GenerateArgs {
    std::string ckpt;
    std::string data_dir;
    std::string split = "test";
    std::string out_dir;
};

int run_generate(const GenerateArgs& a) {
    const Dataset data = load_dataset(fs::path(a.data_dir) / (a.split + ".bin"));
    LoadedModel model = load_model(a.ckpt);

    const fs::path out(a.out_dir);
    fs::create_directories(out);

    std::vector<Image> images;
    if (!data.samples.empty()) images = generate_images(*model.generator, data);
    char name[64];
    for (size_t i = 0; i < images.size(); ++i) {
        std::snprintf(name, sizeof name, "gen_%05zu.ppm", i);
        track(out / name);
        write_ppm(out / name, images[i]);
        std::snprintf(name, sizeof name, "truth_%05zu.ppm", i);
        track(out / name);
        write_ppm(out / name, data.samples[i].image);
    }

    json manifest;
    manifest["command"] = "generate";
    manifest["ckpt"] = a.ckpt;
    manifest["data"] = a.data_dir;
    manifest["split"] = a.split;
    manifest["count"] = images.size();
    manifest["threads"] = thread_count();
    track(out / "manifest.json");
    write_text(out / "manifest.json", manifest.dump(2) + "\n");

    std::cerr << "generate: wrote " << images.size() << " image pairs to " << out << "\n";
    return 0;
}

struct EvalArgs {
    std::string ckpt;
    std::string data_dir;
    std::string split = "test";
    std::string report;
    bool oracle = false;
};

int run_eval(const EvalArgs& a) {
    if (!a.oracle && a.ckpt.empty())
        throw CLI::ValidationError("--ckpt is required unless --oracle is given");
    const Dataset data = load_dataset(fs::path(a.data_dir) / (a.split + ".bin"));

    std::vector<Image> images;
    if (a.oracle) {
        images.reserve(data.samples.size());
        for (const auto& s : data.samples) images.push_back(s.image);
    } else {
        LoadedModel model = load_model(a.ckpt);
        images = generate_images(*model.generator, data);
    }

    const MetricsReport report = evaluate(images, data, a.split);

    json config;
    config["command"] = "eval";
    config["ckpt"] = a.ckpt;
    config["data"] = a.data_dir;
    config["split"] = a.split;
    config["oracle"] = a.oracle;
    config["threads"] = thread_count();

    const fs::path report_path(a.report);
    if (report_path.has_parent_path()) fs::create_directories(report_path.parent_path());
    track(report_path);
    write_report(report_path, report, config.dump());

    std::cerr << "eval[" << a.split << "] n=" << report.n_samples
              << " detect=" << report.detection_success_rate
              << " conf=" << report.mean_confidence << " ssim=" << report.mean_ssim
              << " accuracy=" << report.position_accuracy
              << " pix_err=" << report.pixel_error_mean << "/" << report.pixel_error_max << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CSI-to-image pipeline: dataset synthesis, training, generation, evaluation"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker thread count (default: CSI2IMG_THREADS or all)");

    GenDataArgs gd;
    CLI::App* gen_data = app.add_subcommand("gen-data", "synthesize a paired dataset");
    gen_data->add_option("--scenario", gd.scenario, "exp1|exp2|walk")
        ->required()
        ->check(CLI::IsMember({"exp1", "exp2", "walk"}));
    gen_data->add_option("--train", gd.n_train, "train sample count (default per scenario)");
    gen_data->add_option("--test", gd.n_test, "test sample count (default per scenario)");
    gen_data->add_option("--seed", gd.seed, "rng seed");
    gen_data->add_option("--out", gd.out_dir, "output directory")->required();
    gen_data->add_option("--noise-std", gd.noise_std, "channel noise standard deviation");

    TrainArgs tr;
    CLI::App* train = app.add_subcommand("train", "train a conversion model");
    train->add_option("--mode", tr.mode, "gonly|gan|hybrid")
        ->required()
        ->check(CLI::IsMember({"gonly", "gan", "hybrid"}));
    train->add_option("--iters", tr.iters, "training iterations");
    train->add_option("--batch", tr.batch, "batch size");
    train->add_option("--k", tr.k, "generality interval (hybrid)");
    train->add_option("--data", tr.data_dir, "dataset directory")->required();
    train->add_option("--ckpt", tr.ckpt, "checkpoint output file")->required();
    train->add_option("--seed", tr.seed, "rng seed");
    train->add_option("--gdiv", tr.gdiv, "generator width divisor");
    train->add_option("--ddiv", tr.ddiv, "discriminator width divisor");
    train->add_option("--log", tr.log_path, "training log file (default: <ckpt>.log)");
    train->add_option("--ckpt-every", tr.ckpt_every, "checkpoint cadence (0: final only)");

    GenerateArgs ge;
    CLI::App* generate = app.add_subcommand("generate", "convert CSI features to images");
    generate->add_option("--ckpt", ge.ckpt, "checkpoint file")->required();
    generate->add_option("--data", ge.data_dir, "dataset directory")->required();
    generate->add_option("--split", ge.split, "train|test")
        ->check(CLI::IsMember({"train", "test"}));
    generate->add_option("--out", ge.out_dir, "output directory")->required();

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "score generated images");
    eval_cmd->add_option("--ckpt", ev.ckpt, "checkpoint file");
    eval_cmd->add_option("--data", ev.data_dir, "dataset directory")->required();
    eval_cmd->add_option("--split", ev.split, "train|test")
        ->check(CLI::IsMember({"train", "test"}));
    eval_cmd->add_option("--report", ev.report, "report output file")->required();
    eval_cmd->add_flag("--oracle", ev.oracle, "score ground truth against itself");

    CLI11_PARSE(app, argc, argv);
    tune_allocator();
    if (threads > 0) set_thread_count(threads);

    try {
        if (gen_data->parsed()) return run_gen_data(gd);
        if (train->parsed()) return run_train(tr);
        if (generate->parsed()) return run_generate(ge);
        if (eval_cmd->parsed()) return run_eval(ev);
    } catch (const std::exception& e) {
        cleanup_partial();
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
