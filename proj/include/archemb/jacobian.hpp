#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "archemb/net.hpp"
#include "archemb/space.hpp"

namespace archemb {

/// Probe inputs shared by every architecture and initialization of an
/// experiment; rows are sampled from the training split.
struct ProbeSet {
    Eigen::MatrixXd probes;  // m x input_dim
    std::uint64_t seed = 0;
};

ProbeSet make_probe_set(const Dataset& train, int count, std::uint64_t seed);

/// Stacked data Jacobians: row i is the input gradient of the reduced
/// output at probe i.
struct Edjm {
    Eigen::MatrixXd rows;  // m x input_dim
    Genotype genotype;
    std::uint64_t init_seed = 0;
    std::uint64_t probe_seed = 0;
    OutputReduce reduce = OutputReduce::L1;
};

Edjm assemble_edjm(const NetworkParams& p, const ProbeSet& probes,
                   OutputReduce reduce = OutputReduce::L1);

/// Top-k factors of the stacked matrix, descending singular values.
struct SvdFactors {
    Eigen::MatrixXd u1;       // m x k
    Eigen::VectorXd sigma1;   // k, descending, >= 0
    Eigen::MatrixXd v1;       // input_dim x k
};

struct Epdjm {
    Eigen::MatrixXd rows;  // m x k: row i of the EDJM projected on the top-k
                           // right singular vectors (U1 * diag(sigma1))
    bool normalized = false;
    Genotype genotype;
    std::uint64_t init_seed = 0;
    std::uint64_t probe_seed = 0;
    OutputReduce reduce = OutputReduce::L1;
};

struct Projection {
    Epdjm epdjm;
    SvdFactors factors;
};

/// Projects the stacked Jacobians onto their top-k principal components.
/// Computed by eigendecomposition of the input_dim x input_dim Gram matrix;
/// each V column's sign is fixed so its largest-magnitude entry is positive,
/// making results bit-reproducible. Throws on k outside [1, min(m, dim)].
Projection project(const Edjm& e, int k);

/// Divides every entry by the principal singular value; idempotent.
/// Throws DegenerateArchitectureError when sigma_1 = 0.
Epdjm normalize_psv(const Epdjm& e, const SvdFactors& factors);

/// The principal singular value, a training-free performance heuristic.
double psv_score(const SvdFactors& factors);

}  // namespace archemb
