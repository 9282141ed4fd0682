#include <doctest.h>

#include <cmath>

#include "archemb/errors.hpp"
#include "archemb/forest.hpp"
#include "archemb/rng.hpp"
#include "archemb/stats.hpp"

using namespace archemb;

namespace {

/// O(n^2) pair-counting oracle for tau-b, straight from the definition.
double brute_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    long long concordant = 0, discordant = 0, n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double da = a[i] - a[j], db = b[i] - b[j];
            if (da == 0.0) ++n1;
            if (db == 0.0) ++n2;
            if (da == 0.0 || db == 0.0) continue;
            if ((da > 0) == (db > 0))
                ++concordant;
            else
                ++discordant;
        }
    }
    const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
    return static_cast<double>(concordant - discordant) /
           (std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2)));
}

double brute_pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
    }
    const double ma = sa / n, mb = sb / n;
    double num = 0, da = 0, db = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("pearson and tau-b match brute force on random and tied inputs") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(60);
        std::vector<double> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            // quantized draws produce plenty of ties
            a[i] = std::floor(rng.uniform(0.0, 6.0));
            b[i] = trial % 3 == 0 ? std::floor(rng.uniform(0.0, 4.0)) : rng.normal();
        }
        bool a_const = true, b_const = true;
        for (std::size_t i = 1; i < n; ++i) {
            a_const = a_const && a[i] == a[0];
            b_const = b_const && b[i] == b[0];
        }
        if (a_const || b_const) continue;
        CHECK(std::abs(kendall_tau_b(a, b) - brute_tau_b(a, b)) < 1e-12);
        CHECK(std::abs(pearson(a, b) - brute_pearson(a, b)) < 1e-12);
    }
}

TEST_CASE("metric identities and errors") {
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(pearson(a, a) == doctest::Approx(1.0));
    CHECK(kendall_tau_b(a, a) == doctest::Approx(1.0));

    const std::vector<double> reversed{4, 3, 2, 1};
    CHECK(kendall_tau_b(a, reversed) == doctest::Approx(-1.0));

    const std::vector<double> b{1, 2, 4, 3};
    CHECK(kendall_tau_b(a, b) == doctest::Approx(4.0 / 6.0).epsilon(1e-12));

    const std::vector<double> constant{2, 2, 2, 2};
    CHECK_THROWS_AS(pearson(a, constant), NumericError);
    CHECK_THROWS_AS(kendall_tau_b(a, constant), NumericError);
}

TEST_CASE("permutation test separates signal from noise") {
    Rng rng(2);
    const std::size_t n = 200;
    std::vector<double> x(n), linked(n), noise(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.normal();
        linked[i] = x[i] + 0.5 * rng.normal();
        noise[i] = rng.normal();
    }
    auto tau = [](const std::vector<double>& p, const std::vector<double>& q) {
        return kendall_tau_b(p, q);
    };
    CHECK(permutation_p_greater(x, linked, tau, 500, 0) < 0.01);
    CHECK(permutation_p_greater(x, noise, tau, 500, 0) > 0.05);
}

TEST_CASE("wilcoxon signed-rank: exact small-sample values") {
    // classic example: all positive differences, n = 5 -> one-sided p = 1/32
    const std::vector<double> x{1.1, 2.3, 1.9, 3.1, 2.2};
    const std::vector<double> y{0.9, 1.7, 1.2, 2.5, 1.4};
    const WilcoxonResult r = wilcoxon_signed_rank(x, y);
    CHECK(r.n_effective == 5);
    CHECK(r.w_plus == doctest::Approx(15.0));
    CHECK(r.p_greater == doctest::Approx(1.0 / 32.0).epsilon(1e-12));

    // symmetric differences: p near 1/2 either side
    const std::vector<double> u{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> v{2.0, 1.0, 4.0, 3.0};
    const WilcoxonResult s = wilcoxon_signed_rank(u, v);
    CHECK(s.p_two_sided > 0.5);

    // zero differences are dropped
    const std::vector<double> p{1.0, 2.0, 3.0};
    const std::vector<double> q{1.0, 1.0, 2.0};
    CHECK(wilcoxon_signed_rank(p, q).n_effective == 2);
}

TEST_CASE("wilcoxon detects a consistent paired shift at n=20") {
    Rng rng(3);
    std::vector<double> x(20), y(20);
    for (int i = 0; i < 20; ++i) {
        y[i] = rng.normal();
        x[i] = y[i] + 0.05 + 0.01 * rng.normal();  // consistent small advantage
    }
    const WilcoxonResult r = wilcoxon_signed_rank(x, y);
    CHECK(r.p_greater < 0.001);
    const WilcoxonResult opposite = wilcoxon_signed_rank(y, x);
    CHECK(opposite.p_greater > 0.99);
}

TEST_CASE("forest: constant target, interpolation and planted linear signal") {
    Rng rng(4);
    const int n = 60, d = 6;
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal();

    // constant target: every prediction equals it
    const ForestModel flat = ForestModel::fit(x, Eigen::VectorXd::Constant(n, 0.37), 0, {});
    for (int i = 0; i < 5; ++i) CHECK(flat.predict_one(x.row(i)) == doctest::Approx(0.37));

    // single full-depth tree without bootstrap interpolates its training data
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    ForestConfig exact;
    exact.n_trees = 1;
    exact.min_leaf = 1;
    exact.max_depth = 64;
    exact.bootstrap = false;
    const ForestModel tree = ForestModel::fit(x, y, 0, exact);
    for (int i = 0; i < n; ++i) CHECK(tree.predict_one(x.row(i)) == doctest::Approx(y[i]));

    // y = first coordinate: held-out R^2 >= 0.8 with 500 training rows
    const int big_n = 500;
    Eigen::MatrixXd train(big_n, d), test(200, d);
    Eigen::VectorXd train_y(big_n), test_y(200);
    for (int i = 0; i < big_n; ++i) {
        for (int j = 0; j < d; ++j) train(i, j) = rng.normal();
        train_y[i] = train(i, 0);
    }
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < d; ++j) test(i, j) = rng.normal();
        test_y[i] = test(i, 0);
    }
    const ForestModel forest = ForestModel::fit(train, train_y, 1, {});
    const Eigen::VectorXd pred = forest.predict(test);
    const double ss_res = (pred - test_y).squaredNorm();
    const double ss_tot = (test_y.array() - test_y.mean()).matrix().squaredNorm();
    CHECK(1.0 - ss_res / ss_tot >= 0.8);
}

TEST_CASE("forest predictions are invariant to training row order") {
    Rng rng(5);
    const int n = 80, d = 5;
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
        y[i] = x(i, 1) + 0.1 * rng.normal();
    }
    const ForestModel base = ForestModel::fit(x, y, 7, {});

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    Eigen::MatrixXd xp(n, d);
    Eigen::VectorXd yp(n);
    for (int i = 0; i < n; ++i) {
        xp.row(i) = x.row(static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)]));
        yp[i] = y[static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])];
    }
    const ForestModel shuffled = ForestModel::fit(xp, yp, 7, {});
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd probe(d);
        for (int j = 0; j < d; ++j) probe[j] = rng.normal();
        CHECK(base.predict_one(probe) == shuffled.predict_one(probe));
    }

    CHECK_THROWS_AS(ForestModel::fit(Eigen::MatrixXd(0, 3), Eigen::VectorXd(0), 0, {}),
                    ConfigError);
}
