#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "archemb/space.hpp"

namespace archemb {

/// Points on the unit sphere labelled by a fixed seeded teacher network.
struct Dataset {
    Eigen::MatrixXd inputs;   // n x input_dim, unit-norm rows
    std::vector<int> labels;  // class ids in [0, n_classes)
    std::string split;        // "train" or "test"
    std::uint64_t seed = 0;
};

struct DatasetPair {
    Dataset train;
    Dataset test;
};

/// Teacher weight seed. Chosen so the induced label distribution stays
/// within 10% of balanced on the dataset seeds used by the pipeline
/// (checked in tests; re-pick here if a new dataset seed violates it).
inline constexpr std::uint64_t kTeacherSeed = 181;

/// Logits of the fixed 16->32->32->4 bias-free ReLU teacher, one row per input row.
Eigen::MatrixXd teacher_logits(const Eigen::MatrixXd& inputs);

/// Inputs uniform on the unit sphere, labels = teacher argmax.
/// Train and test rows come from disjoint draws of one seeded stream.
DatasetPair gen_dataset(std::uint64_t seed, int n_train, int n_test);

/// A plain chain of bias-free linear layers with optional ReLU after each.
/// Size-family networks and the dataset teacher are chains; unit tests use
/// hand-built chains for the closed-form Jacobian cases.
struct MlpChain {
    std::vector<Eigen::MatrixXd> weights;  // layer l maps (in) -> (out), stored (out x in)
    std::vector<char> relu_after;          // one flag per layer

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& X) const;  // rows = samples
    /// Exact Jacobian d out / d x at x (out_dim x in_dim).
    Eigen::MatrixXd full_jacobian(const Eigen::VectorXd& x) const;
    /// Gradient of seed . f(x) with respect to x, by backward propagation
    /// through the ReLU-masked matrices.
    Eigen::VectorXd vjp(const Eigen::VectorXd& x, const Eigen::VectorXd& seed) const;
};

/// Seeded weights of an instantiated bias-free ReLU network. No biases
/// anywhere, so f(x) = J(x) x holds exactly within an activation region.
struct NetworkParams {
    SearchSpaceSpec space;
    Genotype genotype;
    std::uint64_t init_seed = 0;
    std::vector<Eigen::MatrixXd> weights;

    int n_weights() const { return static_cast<int>(weights.size()); }
};

/// He-style init, scale sqrt(2/fan_in) per matrix, deterministic per
/// (genotype, init_seed).
///
/// Weight order:
///   topology: W_in (width x input_dim, ReLU), per cell the LinearReLU edge
///             matrices in edge order, W_out (classes x width).
///             Cells are residual: h <- h + dag(h), dag output = last node.
///   size:     one (width_i x width_{i-1}) ReLU layer per gene, then W_out.
NetworkParams instantiate(const SearchSpaceSpec& space, const Genotype& g,
                          std::uint64_t init_seed);

Eigen::VectorXd forward(const NetworkParams& p, const Eigen::VectorXd& x);
Eigen::MatrixXd forward_batch(const NetworkParams& p, const Eigen::MatrixXd& X);

/// Exact Jacobian of the logits with respect to the input (classes x input_dim),
/// accumulated forward together with the values.
Eigen::MatrixXd full_jacobian(const NetworkParams& p, const Eigen::VectorXd& x);

enum class OutputReduce { L1, Sum };

/// Gradient of the scalar-reduced output with respect to x. L1 reduces by
/// sum of |logit_o| (sign-weighted backward seed, sign(0) = 0); Sum seeds
/// every output with 1. Analytic, never finite differences.
Eigen::VectorXd data_jacobian(const NetworkParams& p, const Eigen::VectorXd& x,
                              OutputReduce reduce = OutputReduce::L1);

struct TrainConfig {
    int epochs = 40;
    int batch_size = 128;
    double learning_rate = 0.05;  // cosine-decayed to 0 over all steps
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

struct AccuracyCurve {
    std::vector<double> per_epoch;  // test accuracy after each epoch
    double final_test_accuracy() const { return per_epoch.empty() ? 0.0 : per_epoch.back(); }
};

using Checkpoint = std::vector<Eigen::MatrixXd>;

struct TrainResult {
    NetworkParams params;
    AccuracyCurve curve;
    /// checkpoints[0] = initial weights, checkpoints[e] = after epoch e;
    /// empty unless requested.
    std::vector<Checkpoint> checkpoints;
};

/// SGD with momentum on softmax cross-entropy. Incomplete trailing batches
/// are dropped. Throws TrainDivergenceError on non-finite loss.
TrainResult train(const NetworkParams& p, const DatasetPair& data, const TrainConfig& cfg,
                  bool keep_checkpoints = false);

/// Argmax-of-logits accuracy; ties break toward the lowest class index.
double accuracy_from_logits(const Eigen::MatrixXd& logits, const std::vector<int>& labels);
double test_accuracy(const NetworkParams& p, const Dataset& d);

}  // namespace archemb
