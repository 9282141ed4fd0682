#include "archemb/surrogate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double median_pairwise_distance(const Eigen::MatrixXd& x) {
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(x.rows()) * (x.rows() - 1) / 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = i + 1; j < x.rows(); ++j)
            d.push_back((x.row(i) - x.row(j)).norm());
    if (d.empty()) return 1.0;
    std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
    const double median = d[d.size() / 2];
    return median > 1e-12 ? median : 1.0;
}

Eigen::VectorXd kernel_column(const GpState& s, const Eigen::VectorXd& x_star) {
    Eigen::VectorXd k(s.x.rows());
    for (Eigen::Index i = 0; i < s.x.rows(); ++i)
        k[i] = matern52(s.x.row(i), x_star, s.lengthscale, s.signal_var);
    return k;
}

}  // namespace

double matern52(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double lengthscale,
                double signal_var) {
    if (lengthscale <= 0.0) throw ConfigError("Matern lengthscale must be > 0");
    const double r = (x1 - x2).norm();
    const double s = std::sqrt(5.0) * r / lengthscale;
    return signal_var * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

GpState gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpConfig& cfg) {
    if (x.rows() < 2) throw ConfigError("GP fit needs at least 2 observations");
    if (x.rows() != y.size()) throw ConfigError("GP fit: X and y sizes disagree");
    if (!x.allFinite() || !y.allFinite()) throw NumericError("GP fit: non-finite inputs");

    GpState s;
    s.x = x;
    s.signal_var = cfg.signal_var;
    s.noise_var = cfg.noise_var;
    s.lengthscale = cfg.lengthscale > 0.0 ? cfg.lengthscale : median_pairwise_distance(x);

    s.y_mean = y.mean();
    const double var = (y.array() - s.y_mean).square().sum() / static_cast<double>(y.size());
    const double std_dev = std::sqrt(var);
    s.y_scale = std_dev < 1e-12 ? 1.0 : std_dev;  // constant targets: center only
    s.y_std = (y.array() - s.y_mean) / s.y_scale;

    Eigen::MatrixXd k(x.rows(), x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = i; j < x.rows(); ++j) {
            k(i, j) = matern52(x.row(i), x.row(j), s.lengthscale, s.signal_var);
            k(j, i) = k(i, j);
        }
    }

    for (double jitter = cfg.base_jitter; jitter <= cfg.max_jitter * (1.0 + 1e-12);
         jitter *= 10.0) {
        Eigen::MatrixXd shifted = k;
        shifted.diagonal().array() += s.noise_var + jitter;
        const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() == Eigen::Success) {
            s.jitter = jitter;
            s.chol = llt.matrixL();
            s.alpha = llt.solve(s.y_std);
            return s;
        }
    }
    throw NumericError("GP kernel factorization failed at maximum jitter");
}

GpPrediction gp_posterior(const GpState& s, const Eigen::VectorXd& x_star) {
    const Eigen::VectorXd k_star = kernel_column(s, x_star);
    const double mean_std = k_star.dot(s.alpha);
    const Eigen::VectorXd v = s.chol.triangularView<Eigen::Lower>().solve(k_star);
    double var_std = s.signal_var - v.squaredNorm();
    if (var_std < 0.0) var_std = 0.0;

    GpPrediction out;
    out.mean = s.y_mean + s.y_scale * mean_std;
    out.variance = var_std * s.y_scale * s.y_scale;
    return out;
}

double expected_improvement(double mean, double variance, double best_observed) {
    if (variance < 0.0) variance = 0.0;
    const double sigma = std::sqrt(variance);
    if (sigma == 0.0) return std::max(mean - best_observed, 0.0);
    const double z = (mean - best_observed) / sigma;
    return sigma * (z * norm_cdf(z) + norm_pdf(z));
}

namespace {

void append_eval(SearchLog& log, const SearchProblem& problem, std::size_t index) {
    SearchStep step;
    step.step = static_cast<int>(log.steps.size());
    step.genotype = genotype_at(problem.space, index);
    step.accuracy = problem.accuracy[index];
    step.best_so_far =
        log.steps.empty() ? step.accuracy : std::max(log.steps.back().best_so_far, step.accuracy);
    log.steps.push_back(std::move(step));
}

}  // namespace

SearchLog smbo_search(const SearchProblem& problem, int budget, int n_candidates, int n_init,
                      std::uint64_t seed, const GpConfig& gp) {
    const std::size_t n = problem.accuracy.size();
    if (budget < 1 || static_cast<std::size_t>(budget) > n)
        throw ConfigError("search budget exhausts the space");
    if (problem.embeddings.size() != n)
        throw ConfigError("embedding map does not cover the space");

    SearchLog log;
    log.method = "smbo";
    log.seed = seed;
    Rng rng(derive_seed("search.smbo", seed));

    std::vector<char> evaluated(n, 0);
    std::vector<std::size_t> order;  // evaluated indices, in evaluation order
    for (const std::size_t i :
         rng.sample_without_replacement(n, static_cast<std::size_t>(std::min(n_init, budget)))) {
        evaluated[i] = 1;
        order.push_back(i);
        append_eval(log, problem, i);
    }

    while (static_cast<int>(log.steps.size()) < budget) {
        Eigen::MatrixXd x(order.size(), problem.embeddings[0].size());
        Eigen::VectorXd y(order.size());
        for (std::size_t r = 0; r < order.size(); ++r) {
            x.row(static_cast<Eigen::Index>(r)) = problem.embeddings[order[r]];
            y[static_cast<Eigen::Index>(r)] = problem.accuracy[order[r]];
        }
        const GpState state = gp_fit(x, y, gp);
        const double best = log.steps.back().best_so_far;

        std::vector<std::size_t> unevaluated;
        unevaluated.reserve(n - order.size());
        for (std::size_t i = 0; i < n; ++i)
            if (!evaluated[i]) unevaluated.push_back(i);
        const auto picks = rng.sample_without_replacement(
            unevaluated.size(),
            std::min<std::size_t>(static_cast<std::size_t>(n_candidates), unevaluated.size()));

        std::size_t chosen = n;
        double best_ei = -1.0;
        for (const std::size_t pick : picks) {
            const std::size_t candidate = unevaluated[pick];
            const GpPrediction post = gp_posterior(state, problem.embeddings[candidate]);
            const double ei = expected_improvement(post.mean, post.variance, best);
            // ties break toward the lowest genotype string = lowest index
            if (ei > best_ei || (ei == best_ei && candidate < chosen)) {
                best_ei = ei;
                chosen = candidate;
            }
        }
        evaluated[chosen] = 1;
        order.push_back(chosen);
        append_eval(log, problem, chosen);
    }
    return log;
}

SearchLog random_search(const SearchProblem& problem, int budget, std::uint64_t seed) {
    const std::size_t n = problem.accuracy.size();
    if (budget < 1 || static_cast<std::size_t>(budget) > n)
        throw ConfigError("search budget exhausts the space");
    SearchLog log;
    log.method = "random";
    log.seed = seed;
    Rng rng(derive_seed("search.random", seed));
    for (const std::size_t i : rng.sample_without_replacement(n, static_cast<std::size_t>(budget)))
        append_eval(log, problem, i);
    return log;
}

SearchLog aging_evolution(const SearchProblem& problem, int budget, int population,
                          int tournament, std::uint64_t seed) {
    const std::size_t n = problem.accuracy.size();
    if (budget < population) throw ConfigError("evolution budget below the population size");
    if (static_cast<std::size_t>(budget) > n) throw ConfigError("search budget exhausts the space");

    SearchLog log;
    log.method = "evolution";
    log.seed = seed;
    Rng rng(derive_seed("search.evolution", seed));

    std::vector<char> evaluated(n, 0);
    std::vector<std::size_t> queue;  // oldest first
    for (const std::size_t i :
         rng.sample_without_replacement(n, static_cast<std::size_t>(population))) {
        evaluated[i] = 1;
        queue.push_back(i);
        append_eval(log, problem, i);
    }

    while (static_cast<int>(log.steps.size()) < budget) {
        const auto picks = rng.sample_without_replacement(
            queue.size(), static_cast<std::size_t>(std::min<int>(tournament, queue.size())));
        std::size_t parent = queue[picks[0]];
        for (const std::size_t p : picks)
            if (problem.accuracy[queue[p]] > problem.accuracy[parent]) parent = queue[p];

        std::size_t child = n;
        const Genotype parent_geno = genotype_at(problem.space, parent);
        for (int attempt = 0; attempt < 100 && child == n; ++attempt) {
            const Genotype candidate = mutate(problem.space, parent_geno, rng.next_u64());
            const std::size_t idx = genotype_index(problem.space, candidate);
            if (!evaluated[idx]) child = idx;
        }
        if (child == n) {
            // saturated neighborhood: fall back to a uniform unevaluated pick
            std::vector<std::size_t> unevaluated;
            for (std::size_t i = 0; i < n; ++i)
                if (!evaluated[i]) unevaluated.push_back(i);
            child = unevaluated[rng.uniform_index(unevaluated.size())];
        }
        evaluated[child] = 1;
        queue.push_back(child);
        queue.erase(queue.begin());  // remove the oldest
        append_eval(log, problem, child);
    }
    return log;
}

}  // namespace archemb
