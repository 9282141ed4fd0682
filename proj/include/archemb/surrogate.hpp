#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "archemb/space.hpp"

namespace archemb {

/// Matern-5/2: sigma_f^2 (1 + sqrt5 r/l + 5r^2/(3l^2)) exp(-sqrt5 r/l),
/// r = Euclidean distance.
double matern52(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double lengthscale,
                double signal_var = 1.0);

struct GpConfig {
    double signal_var = 1.0;
    double noise_var = 1e-4;
    double base_jitter = 1e-8;
    double max_jitter = 1e-4;  // escalation in x10 steps
    double lengthscale = 0.0;  // <= 0: median pairwise distance heuristic
};

/// Fitted Gaussian process: standardized targets, Matern-5/2 kernel with
/// median-heuristic lengthscale, Cholesky factor of K + noise I + jitter I.
struct GpState {
    Eigen::MatrixXd x;       // n x d observed embeddings
    Eigen::VectorXd y_std;   // standardized targets
    double y_mean = 0.0;
    double y_scale = 1.0;    // 1 when target std < 1e-12
    double lengthscale = 1.0;
    double signal_var = 1.0;
    double noise_var = 1e-4;
    double jitter = 0.0;     // jitter that made the factorization succeed
    Eigen::MatrixXd chol;    // lower-triangular L with L L^T = K + noise I + jitter I
    Eigen::VectorXd alpha;   // (K + noise I + jitter I)^{-1} y_std
};

GpState gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& cfg = {});

struct GpPrediction {
    double mean = 0.0;      // un-standardized accuracy units
    double variance = 0.0;  // un-standardized, clamped at 0
};

GpPrediction gp_posterior(const GpState& s, const Eigen::VectorXd& x_star);

/// EI for maximization: sigma (z Phi(z) + phi(z)) with z = (mean-best)/sigma;
/// max(mean-best, 0) when sigma = 0.
double expected_improvement(double mean, double variance, double best_observed);

struct SearchStep {
    int step = 0;
    Genotype genotype;
    double accuracy = 0.0;
    double best_so_far = 0.0;
};

struct SearchLog {
    std::string method;
    std::uint64_t seed = 0;
    std::vector<SearchStep> steps;
};

/// A fully tabulated problem: accuracy (and, for the surrogate, an
/// embedding) for every genotype of the space, indexed in enumeration order.
struct SearchProblem {
    SearchSpaceSpec space;
    std::vector<double> accuracy;             // one entry per genotype
    std::vector<Eigen::VectorXd> embeddings;  // may be empty for baselines
};

/// SMBO: n_init random evaluations, then fit the GP, draw n_candidates
/// unevaluated genotypes, evaluate the EI argmax (ties toward the lowest
/// genotype string). No genotype is evaluated twice.
SearchLog smbo_search(const SearchProblem& problem, int budget, int n_candidates = 20,
                      int n_init = 5, std::uint64_t seed = 0, const GpConfig& gp = {});

SearchLog random_search(const SearchProblem& problem, int budget, std::uint64_t seed = 0);

/// Tournament evolution with an aging queue: sample `tournament` members,
/// mutate the best, evaluate the child, drop the oldest. Children that were
/// already evaluated are re-mutated (uniform fallback keeps progress).
SearchLog aging_evolution(const SearchProblem& problem, int budget, int population = 20,
                          int tournament = 10, std::uint64_t seed = 0);

}  // namespace archemb
