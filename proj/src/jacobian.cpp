#include "archemb/jacobian.hpp"

#include <Eigen/Eigenvalues>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

ProbeSet make_probe_set(const Dataset& train, int count, std::uint64_t seed) {
    const int n = static_cast<int>(train.inputs.rows());
    if (count < 1 || count > n) throw ConfigError("probe count out of range");
    Rng rng(derive_seed("jacobian.probes", seed));
    const auto idx = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                    static_cast<std::size_t>(count));
    ProbeSet ps;
    ps.seed = seed;
    ps.probes.resize(count, train.inputs.cols());
    for (int i = 0; i < count; ++i)
        ps.probes.row(i) = train.inputs.row(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]));
    return ps;
}

Edjm assemble_edjm(const NetworkParams& p, const ProbeSet& probes, OutputReduce reduce) {
    Edjm e;
    e.genotype = p.genotype;
    e.init_seed = p.init_seed;
    e.probe_seed = probes.seed;
    e.reduce = reduce;
    e.rows.resize(probes.probes.rows(), probes.probes.cols());
    for (Eigen::Index i = 0; i < probes.probes.rows(); ++i) {
        const Eigen::VectorXd grad = data_jacobian(p, probes.probes.row(i), reduce);
        if (!grad.allFinite())
            throw NumericError("non-finite data Jacobian at probe " + std::to_string(i) +
                               " of " + format_genotype(p.genotype));
        e.rows.row(i) = grad;
    }
    return e;
}

Projection project(const Edjm& e, int k) {
    const Eigen::Index m = e.rows.rows();
    const Eigen::Index dim = e.rows.cols();
    if (k < 1 || k > std::min(m, dim)) throw ConfigError("projection rank k out of range");

    // Right singular vectors from the small Gram matrix; cheap and stable
    // since dim << m in practice.
    const Eigen::MatrixXd gram = e.rows.transpose() * e.rows;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");

    // eigenvalues come back ascending
    SvdFactors f;
    f.sigma1.resize(k);
    f.v1.resize(dim, k);
    for (int j = 0; j < k; ++j) {
        const Eigen::Index src = dim - 1 - j;
        f.sigma1[j] = std::sqrt(std::max(eig.eigenvalues()[src], 0.0));
        Eigen::VectorXd v = eig.eigenvectors().col(src);
        // sign convention: largest-magnitude entry positive
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        f.v1.col(j) = v;
    }

    Projection out;
    out.epdjm.rows = e.rows * f.v1;  // = U1 * diag(sigma1)
    out.epdjm.normalized = false;
    out.epdjm.genotype = e.genotype;
    out.epdjm.init_seed = e.init_seed;
    out.epdjm.probe_seed = e.probe_seed;
    out.epdjm.reduce = e.reduce;

    f.u1.resize(m, k);
    for (int j = 0; j < k; ++j) {
        if (f.sigma1[j] > 0.0)
            f.u1.col(j) = out.epdjm.rows.col(j) / f.sigma1[j];
        else
            f.u1.col(j).setZero();
    }
    out.factors = std::move(f);
    return out;
}

Epdjm normalize_psv(const Epdjm& e, const SvdFactors& factors) {
    if (e.normalized) return e;
    const double sigma = factors.sigma1[0];
    if (sigma <= 0.0)
        throw DegenerateArchitectureError("zero principal singular value for " +
                                          format_genotype(e.genotype));
    Epdjm out = e;
    out.rows /= sigma;
    out.normalized = true;
    return out;
}

double psv_score(const SvdFactors& factors) { return factors.sigma1[0]; }

}  // namespace archemb
