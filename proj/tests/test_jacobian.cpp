#include <doctest.h>

#include <Eigen/SVD>
#include <cstdio>
#include <filesystem>

#include "archemb/errors.hpp"
#include "archemb/jacobian.hpp"
#include "archemb/matrix_io.hpp"
#include "archemb/rng.hpp"

using namespace archemb;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
    return m;
}

Edjm wrap(const Eigen::MatrixXd& rows) {
    Edjm e;
    e.rows = rows;
    e.genotype = parse_genotype("T-000000");
    return e;
}

}  // namespace

TEST_CASE("probe sets are dataset rows, deterministic per seed") {
    const DatasetPair data = gen_dataset(0, 256, 32);
    const ProbeSet a = make_probe_set(data.train, 32, 5);
    const ProbeSet b = make_probe_set(data.train, 32, 5);
    CHECK(a.probes == b.probes);
    CHECK(a.probes.rows() == 32);
    for (int i = 0; i < a.probes.rows(); ++i) {
        bool found = false;
        for (int r = 0; r < data.train.inputs.rows() && !found; ++r)
            found = a.probes.row(i) == data.train.inputs.row(r);
        CHECK(found);
    }
    CHECK_THROWS_AS(make_probe_set(data.train, 0, 1), ConfigError);
    CHECK_THROWS_AS(make_probe_set(data.train, 1000, 1), ConfigError);
}

TEST_CASE("assemble_edjm stacks per-probe Jacobians row-wise") {
    const DatasetPair data = gen_dataset(0, 256, 32);
    const auto space = SearchSpaceSpec::topology();
    const NetworkParams p = instantiate(space, parse_genotype("T-202101"), 0);

    const ProbeSet one = make_probe_set(data.train, 1, 9);
    const Edjm single = assemble_edjm(p, one);
    CHECK(single.rows.rows() == 1);
    CHECK((single.rows.row(0).transpose() - data_jacobian(p, one.probes.row(0))).norm() == 0.0);

    ProbeSet probes = make_probe_set(data.train, 16, 2);
    const Edjm e = assemble_edjm(p, probes);
    ProbeSet reversed = probes;
    reversed.probes = probes.probes.colwise().reverse().eval();
    const Edjm er = assemble_edjm(p, reversed);
    CHECK((er.rows - e.rows.colwise().reverse()).cwiseAbs().maxCoeff() == 0.0);

    // all-Zero cells versus one parametric edge differ
    const NetworkParams zero_net = instantiate(space, parse_genotype("T-000000"), 0);
    const NetworkParams one_edge = instantiate(space, parse_genotype("T-000002"), 0);
    const Edjm ez = assemble_edjm(zero_net, probes);
    const Edjm eo = assemble_edjm(one_edge, probes);
    CHECK((ez.rows - eo.rows).norm() > 0.0);
}

TEST_CASE("project matches a full SVD oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd m = random_matrix(rng, 32, 16);
        const Edjm e = wrap(m);
        const auto [epdjm, factors] = project(e, 8);

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        for (int j = 0; j < 8; ++j)
            CHECK(factors.sigma1[j] == doctest::Approx(svd.singularValues()[j]).epsilon(1e-9));

        // orthonormal factors
        CHECK((factors.u1.transpose() * factors.u1 - Eigen::MatrixXd::Identity(8, 8))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
        CHECK((factors.v1.transpose() * factors.v1 - Eigen::MatrixXd::Identity(8, 8))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);

        // rank-k reconstruction error equals the tail singular value formula
        const Eigen::MatrixXd approx =
            factors.u1 * factors.sigma1.asDiagonal() * factors.v1.transpose();
        double tail = 0.0;
        for (int j = 8; j < svd.singularValues().size(); ++j)
            tail += svd.singularValues()[j] * svd.singularValues()[j];
        CHECK((m - approx).norm() == doctest::Approx(std::sqrt(tail)).epsilon(1e-9));

        // EPDJM = U1 Sigma1 = rows * V1
        CHECK((epdjm.rows - m * factors.v1).cwiseAbs().maxCoeff() == 0.0);
        CHECK((epdjm.rows - factors.u1 * factors.sigma1.asDiagonal()).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("full-rank projection preserves geometry; rank-1 captures the norm") {
    Rng rng(29);
    const Eigen::MatrixXd m = random_matrix(rng, 12, 6);
    const auto [full, f_full] = project(wrap(m), 6);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = i + 1; j < m.rows(); ++j) {
            const double before = (m.row(i) - m.row(j)).norm();
            const double after = (full.rows.row(i) - full.rows.row(j)).norm();
            CHECK(before == doctest::Approx(after).epsilon(1e-9));
        }

    // rank-1 input: single projected column carries each row's full norm
    const Eigen::MatrixXd rank1 = random_matrix(rng, 8, 1) * random_matrix(rng, 1, 5);
    const auto [one, f_one] = project(wrap(rank1), 1);
    for (int i = 0; i < rank1.rows(); ++i)
        CHECK(std::abs(one.rows(i, 0)) == doctest::Approx(rank1.row(i).norm()).epsilon(1e-9));
}

TEST_CASE("project is deterministic with a positive-sign convention") {
    Rng rng(37);
    const Eigen::MatrixXd m = random_matrix(rng, 20, 10);
    const auto [a, fa] = project(wrap(m), 4);
    const auto [b, fb] = project(wrap(m), 4);
    CHECK(a.rows == b.rows);
    for (int j = 0; j < fa.v1.cols(); ++j) {
        Eigen::Index imax = 0;
        fa.v1.col(j).cwiseAbs().maxCoeff(&imax);
        CHECK(fa.v1(imax, j) > 0.0);
    }
    CHECK_THROWS_AS(project(wrap(m), 0), ConfigError);
    CHECK_THROWS_AS(project(wrap(m), 11), ConfigError);
}

TEST_CASE("normalize_psv fixes the top singular value at one and is idempotent") {
    Rng rng(41);
    const Eigen::MatrixXd m = random_matrix(rng, 32, 16);
    const auto [epdjm, factors] = project(wrap(m), 8);

    const Epdjm norm = normalize_psv(epdjm, factors);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(norm.rows);
    CHECK(svd.singularValues()[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(norm.normalized);

    const Epdjm again = normalize_psv(norm, factors);
    CHECK(again.rows == norm.rows);

    // scaling the EDJM first changes nothing after normalization
    const auto [scaled, f_scaled] = project(wrap(3.0 * m), 8);
    const Epdjm norm_scaled = normalize_psv(scaled, f_scaled);
    CHECK((norm_scaled.rows - norm.rows).cwiseAbs().maxCoeff() < 1e-12);

    // degenerate all-zero input
    const auto [zed, f_zed] = project(wrap(Eigen::MatrixXd::Zero(8, 4)), 2);
    CHECK_THROWS_AS(normalize_psv(zed, f_zed), DegenerateArchitectureError);
}

TEST_CASE("psv_score is the top singular value and scales linearly") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    const auto [e1, f1] = project(wrap(eye), 2);
    CHECK(psv_score(f1) == doctest::Approx(1.0));

    Rng rng(53);
    const Eigen::MatrixXd m = random_matrix(rng, 16, 8);
    const auto [ea, fa] = project(wrap(m), 4);
    const auto [eb, fb] = project(wrap(2.5 * m), 4);
    CHECK(psv_score(fb) == doctest::Approx(2.5 * psv_score(fa)).epsilon(1e-12));
}

TEST_CASE("matrix files round-trip bit-exactly") {
    Rng rng(61);
    const Eigen::MatrixXd m = random_matrix(rng, 7, 5);
    const auto path = std::filesystem::temp_directory_path() / "archemb_matio_test.epdj";
    save_matrix(path, m, true);
    bool normalized = false;
    const Eigen::MatrixXd back = load_matrix(path, &normalized);
    CHECK(normalized);
    CHECK(back == m);

    const std::vector<Eigen::MatrixXd> several{m, random_matrix(rng, 2, 9),
                                               random_matrix(rng, 1, 1)};
    save_matrices(path, several);
    const auto loaded = load_matrices(path);
    REQUIRE(loaded.size() == several.size());
    for (std::size_t i = 0; i < several.size(); ++i) CHECK(loaded[i] == several[i]);
    std::filesystem::remove(path);
}
