#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "archemb/benchmark.hpp"
#include "archemb/config.hpp"
#include "archemb/encoder.hpp"
#include "archemb/net.hpp"
#include "archemb/space.hpp"

namespace archemb::pipeline {

/// Dataset constants shared by every stage. One fixed dataset per artifact
/// tree; per-genotype randomness flows through the seeds in the config.
inline constexpr std::uint64_t kDatasetSeed = 0;
inline constexpr int kTrainSize = 2048;
inline constexpr int kTestSize = 4096;
inline constexpr int kTraceArchitectures = 50;

std::vector<SearchSpaceSpec> spaces_of(const ExperimentConfig& cfg);
std::string space_tag(const SearchSpaceSpec& space);

std::filesystem::path bench_path(const ExperimentConfig& cfg, const SearchSpaceSpec& space);
std::filesystem::path views_dir(const ExperimentConfig& cfg, const SearchSpaceSpec& space);
std::filesystem::path encoder_dir(const ExperimentConfig& cfg);
std::filesystem::path embeddings_path(const ExperimentConfig& cfg, const SearchSpaceSpec& space);

DatasetPair experiment_dataset();
ProbeSet experiment_probes(const ExperimentConfig& cfg);

/// Trains every (genotype, bench seed) pair that is not already in the
/// benchmark file; existing records are never retrained.
void gen_bench(const ExperimentConfig& cfg, int jobs);

void compute_epdjm(const ExperimentConfig& cfg, int jobs);
ViewStore load_view_store(const ExperimentConfig& cfg, const SearchSpaceSpec& space);

void train_encoder_cmd(const ExperimentConfig& cfg, int jobs);
void save_encoder(const EncoderParams& enc, const std::filesystem::path& dir,
                  const std::string& header_comment);
EncoderParams load_encoder(const std::filesystem::path& dir);

void embed_cmd(const ExperimentConfig& cfg, int jobs);
/// genotype -> per-view embeddings, in view-seed order.
std::map<std::string, std::vector<Eigen::VectorXd>> load_embeddings_csv(
    const std::filesystem::path& path);
/// Mean over views: the canonical per-genotype embedding used downstream.
Eigen::VectorXd mean_embedding(const std::vector<Eigen::VectorXd>& views);

void search_cmd(const ExperimentConfig& cfg, int jobs);
void predict_cmd(const ExperimentConfig& cfg, int jobs);
void transfer_cmd(const ExperimentConfig& cfg, int jobs);
void trace_cmd(const ExperimentConfig& cfg, int jobs);
void report_cmd(const ExperimentConfig& cfg, int jobs);

}  // namespace archemb::pipeline
