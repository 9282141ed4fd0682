#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "archemb/encoder.hpp"
#include "archemb/forest.hpp"
#include "archemb/net.hpp"
#include "archemb/space.hpp"

namespace archemb {

struct PredictivePower {
    double pearson = 0.0;
    double kendall_tau = 0.0;
};

/// Fits a forest on n_train random (embedding, accuracy) pairs and scores
/// both correlations on the held-out remainder.
PredictivePower predictive_power(const std::vector<Eigen::VectorXd>& embeddings,
                                 const std::vector<double>& accuracies, int n_train,
                                 std::uint64_t seed, const ForestConfig& cfg = {});

/// Embeddings and final accuracies of one whole search space, aligned by
/// genotype.
struct SpaceData {
    Family family = Family::Topology;
    std::vector<Eigen::VectorXd> embeddings;
    std::vector<double> accuracies;
};

/// Exposes the target space to transfer runs through correlations only;
/// the accuracies themselves stay private to this wrapper.
class EvalOnlyBenchmark {
  public:
    explicit EvalOnlyBenchmark(std::vector<double> accuracies)
        : accuracies_(std::move(accuracies)) {}
    std::size_t size() const { return accuracies_.size(); }
    double correlate_pearson(const std::vector<double>& predictions) const;
    double correlate_kendall(const std::vector<double>& predictions) const;

  private:
    std::vector<double> accuracies_;
};

struct TransferRow {
    Family source;
    Family target;
    int seed = 0;
    double pearson = 0.0;
    double kendall_tau = 0.0;
};

struct TransferAggregate {
    Family source;
    Family target;
    double pearson_mean = 0.0, pearson_std = 0.0;
    double kendall_mean = 0.0, kendall_std = 0.0;
};

struct TransferReport {
    std::vector<TransferRow> rows;
    std::vector<TransferAggregate> aggregates;
};

/// All four directions between two spaces: a forest fit on the full source
/// space, evaluated on the full target space through the eval-only handle,
/// repeated for seeds 0..n_seeds-1 and aggregated as mean +/- std.
TransferReport transfer_experiment(const SpaceData& a, const SpaceData& b, int n_seeds = 10,
                                   const ForestConfig& cfg = {});

/// Embedding of the EPDJM recomputed at every training checkpoint, epoch order.
std::vector<Eigen::VectorXd> evolution_trace(const EncoderParams& enc, const NetworkParams& net,
                                             const std::vector<Checkpoint>& checkpoints,
                                             const ProbeSet& probes, int k, bool normalized,
                                             OutputReduce reduce = OutputReduce::L1);

/// Rows centered and projected on the top-2 principal directions, with the
/// same sign convention as the EPDJM projection. Throws on n < 3 or
/// zero-variance input.
Eigen::MatrixXd pca2d(const std::vector<Eigen::VectorXd>& embeddings);

}  // namespace archemb
