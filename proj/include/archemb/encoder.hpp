#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "archemb/jacobian.hpp"
#include "archemb/space.hpp"

namespace archemb {

/// Weights of the permutation-invariant encoder: a shared per-row MLP (phi),
/// mean aggregation, an output MLP (rho), and a linear projection head that
/// exists only inside the contrastive loss. Bias-free throughout, like the
/// networks being embedded.
struct EncoderParams {
    Eigen::MatrixXd phi1;  // hidden x k
    Eigen::MatrixXd phi2;  // hidden x hidden
    Eigen::MatrixXd rho1;  // hidden x hidden
    Eigen::MatrixXd rho2;  // d_embed x hidden
    Eigen::MatrixXd head;  // d_proj x d_embed
    std::uint64_t init_seed = 0;

    std::vector<Eigen::MatrixXd*> matrices() {
        return {&phi1, &phi2, &rho1, &rho2, &head};
    }
    std::vector<const Eigen::MatrixXd*> matrices() const {
        return {&phi1, &phi2, &rho1, &rho2, &head};
    }
};

struct ContrastiveConfig {
    double temperature = 0.1;
    int batch_size = 64;  // genotypes per step
    int n_views = 4;
    int steps = 2000;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    int k = 8;
    int hidden = 64;
    int d_embed = 32;
    int d_proj = 32;
};

EncoderParams init_encoder(const ContrastiveConfig& cfg, std::uint64_t seed);

/// Precomputed views: n_views EPDJMs per genotype, one per init seed.
struct ViewStore {
    std::vector<Genotype> genotypes;        // canonical order, degenerates excluded
    std::vector<std::vector<Epdjm>> views;  // [genotype][view]
    std::vector<Genotype> degenerate;       // excluded with a warning list
    std::uint64_t probe_seed = 0;
    int k = 0;
    int n_views = 0;
    bool normalized = false;
    OutputReduce reduce = OutputReduce::L1;
};

ViewStore precompute_views(const SearchSpaceSpec& space, const ProbeSet& probes, int k,
                           int n_views, bool normalized, OutputReduce reduce = OutputReduce::L1,
                           int jobs = 1);

/// Concatenates the stores of two spaces into one; shapes and flags must match.
ViewStore merge_stores(const ViewStore& a, const ViewStore& b);

/// rho(mean over rows of phi(row)): exactly invariant to row permutation.
/// This pre-head output is the embedding used downstream.
Eigen::VectorXd encode(const EncoderParams& enc, const Epdjm& e);
Eigen::VectorXd encode_rows(const EncoderParams& enc, const Eigen::MatrixXd& rows);

/// Linear head then L2 normalization to the unit sphere.
Eigen::VectorXd project_head(const EncoderParams& enc, const Eigen::VectorXd& emb);

struct NtXentResult {
    double loss = 0.0;
    Eigen::MatrixXd d_projections;  // gradient with respect to each input row
};

/// Normalized-temperature cross-entropy over 2N unit rows paired as
/// (2i, 2i+1): each anchor's positive scored against the 2N-2 negatives,
/// averaged over all 2N anchors.
NtXentResult nt_xent(const Eigen::MatrixXd& projections, double temperature);

struct EncoderGrads {
    Eigen::MatrixXd phi1, phi2, rho1, rho2, head;

    static EncoderGrads zeros_like(const EncoderParams& p);
    void add(const EncoderGrads& other);
};

/// Full forward (encode -> head -> normalize -> NT-Xent) and analytic
/// backward over a paired batch of EPDJM row matrices.
struct ContrastiveStep {
    double loss = 0.0;
    EncoderGrads grads;
};

ContrastiveStep contrastive_loss_and_grads(const EncoderParams& enc,
                                           const std::vector<const Eigen::MatrixXd*>& batch,
                                           double temperature, int jobs = 1);

struct TrainedEncoder {
    EncoderParams params;
    std::vector<double> loss_trace;
};

/// Each step samples batch_size genotypes without replacement and two
/// distinct views per genotype, then takes an Adam step (beta 0.9/0.999,
/// eps 1e-8). Deterministic per seed; throws on non-finite loss.
TrainedEncoder train_encoder(const ViewStore& store, const ContrastiveConfig& cfg, int jobs = 1);

}  // namespace archemb
