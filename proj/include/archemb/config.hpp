#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace archemb {

/// key=value experiment configuration. Unknown keys are rejected; missing
/// keys fall back to these defaults. `space` may be "topology", "size" or
/// "both" (both spaces with a shared probe set and a union-trained encoder,
/// which the transfer stage requires).
struct ExperimentConfig {
    std::string space = "topology";
    int probe_count = 32;
    std::uint64_t probe_seed = 0;
    int k = 8;
    bool normalized = false;
    std::string output_reduce = "l1";  // l1 | sum
    int n_views = 4;
    double temperature = 0.1;
    int batch_size = 512;
    int d_embed = 32;
    int d_proj = 32;
    int encoder_steps = 2000;
    std::uint64_t encoder_seed = 0;
    int train_epochs = 40;
    int bench_seeds = 1;
    int search_budget = 30;
    int search_seeds = 20;
    std::string out_dir = "out";
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Fixed-order key=value echo of the fully resolved configuration.
std::string resolved_config_text(const ExperimentConfig& cfg);

/// FNV-1a of the resolved text, as 16 hex digits; stamped into every
/// output file's header comment.
std::string config_hash_hex(const ExperimentConfig& cfg);

/// Writes `# config <hash>` followed by the resolved text.
void write_resolved_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

}  // namespace archemb
