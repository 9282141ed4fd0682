#include <cstdio>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "archemb/config.hpp"
#include "archemb/errors.hpp"
#include "archemb/pipeline.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (key=value lines)");
    cmd->add_option("--jobs", opts.jobs, "worker threads for independent work items");
    cmd->add_option("--out", opts.out_dir, "override the config's out_dir");
}

archemb::ExperimentConfig resolve(const CommonOptions& opts) {
    archemb::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = archemb::load_config_file(opts.config_path);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrastive architecture embeddings on tabular ReLU-MLP benchmarks"};
    app.require_subcommand(1);

    using Stage = void (*)(const archemb::ExperimentConfig&, int);
    const std::pair<const char*, Stage> stages[] = {
        {"gen-bench", &archemb::pipeline::gen_bench},
        {"compute-epdjm", &archemb::pipeline::compute_epdjm},
        {"train-encoder", &archemb::pipeline::train_encoder_cmd},
        {"embed", &archemb::pipeline::embed_cmd},
        {"search", &archemb::pipeline::search_cmd},
        {"predict", &archemb::pipeline::predict_cmd},
        {"transfer", &archemb::pipeline::transfer_cmd},
        {"trace", &archemb::pipeline::trace_cmd},
        {"report", &archemb::pipeline::report_cmd},
    };

    CommonOptions opts;
    Stage selected = nullptr;
    for (const auto& [name, stage] : stages) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common(cmd, opts);
        cmd->callback([&selected, stage = stage] { selected = stage; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const archemb::ExperimentConfig cfg = resolve(opts);
        if (opts.jobs < 1) opts.jobs = 1;
        selected(cfg, opts.jobs);
        return 0;
    } catch (const archemb::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const archemb::MissingArtifactError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 4;
    } catch (const archemb::NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    }
}
