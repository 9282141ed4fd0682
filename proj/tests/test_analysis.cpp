#include <doctest.h>

#include <cmath>

#include "archemb/analysis.hpp"
#include "archemb/errors.hpp"
#include "archemb/rng.hpp"
#include "archemb/stats.hpp"

using namespace archemb;

namespace {

std::vector<Eigen::VectorXd> random_embeddings(Rng& rng, int n, int d) {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd e(d);
        for (int j = 0; j < d; ++j) e[j] = rng.normal();
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

TEST_CASE("predictive_power recovers a planted signal and stays null on noise") {
    Rng rng(1);
    const int n = 500, d = 8;
    const auto embeddings = random_embeddings(rng, n, d);
    std::vector<double> accuracies;
    for (const auto& e : embeddings) accuracies.push_back(e[0]);

    const PredictivePower planted = predictive_power(embeddings, accuracies, 100, 0);
    CHECK(planted.pearson > 0.7);
    CHECK(planted.kendall_tau > 0.5);

    // fresh random embeddings against the same targets: tau near zero
    std::vector<double> taus;
    for (int seed = 0; seed < 10; ++seed) {
        Rng null_rng(100 + seed);
        const auto noise = random_embeddings(null_rng, n, d);
        taus.push_back(predictive_power(noise, accuracies, 100, seed).kendall_tau);
    }
    CHECK(std::abs(mean_of(taus)) < 0.1);
}

TEST_CASE("transfer_experiment is symmetric under swapping the spaces") {
    Rng rng(2);
    SpaceData a, b;
    a.family = Family::Size;
    b.family = Family::Topology;
    a.embeddings = random_embeddings(rng, 60, 6);
    b.embeddings = random_embeddings(rng, 80, 6);
    for (const auto& e : a.embeddings) a.accuracies.push_back(0.5 + 0.2 * std::tanh(e[0]));
    for (const auto& e : b.embeddings) b.accuracies.push_back(0.5 + 0.2 * std::tanh(e[0]));

    const TransferReport fwd = transfer_experiment(a, b, 3);
    const TransferReport rev = transfer_experiment(b, a, 3);
    REQUIRE(fwd.rows.size() == rev.rows.size());
    for (const TransferRow& row : fwd.rows) {
        bool found = false;
        for (const TransferRow& other : rev.rows) {
            if (other.source == row.source && other.target == row.target &&
                other.seed == row.seed) {
                CHECK(other.pearson == row.pearson);
                CHECK(other.kendall_tau == row.kendall_tau);
                found = true;
            }
        }
        CHECK(found);
    }

    // shared planted signal transfers across the two spaces
    for (const TransferAggregate& agg : fwd.aggregates) {
        if (agg.source != agg.target) CHECK(agg.pearson_mean > 0.3);
    }
}

TEST_CASE("evolution_trace embeds every checkpoint in epoch order") {
    const DatasetPair data = gen_dataset(0, 256, 64);
    const ProbeSet probes = make_probe_set(data.train, 8, 0);
    const auto space = SearchSpaceSpec::topology();
    const Genotype g = parse_genotype("T-210210");
    const NetworkParams net = instantiate(space, g, 0);

    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 128;
    const TrainResult result = train(net, data, cfg, /*keep_checkpoints=*/true);

    ContrastiveConfig enc_cfg;
    enc_cfg.k = 4;
    enc_cfg.hidden = 8;
    enc_cfg.d_embed = 6;
    const EncoderParams enc = init_encoder(enc_cfg, 0);

    const auto trace = evolution_trace(enc, net, result.checkpoints, probes, 4, false);
    CHECK(trace.size() == result.checkpoints.size());

    // epoch-0 entry equals the embedding of the initialization EPDJM
    const Edjm edjm = assemble_edjm(net, probes);
    const auto [epdjm, factors] = project(edjm, 4);
    CHECK(trace[0] == encode(enc, epdjm));

    // training moved the embedding
    CHECK((trace.back() - trace.front()).norm() > 0.0);
}

TEST_CASE("pca2d: rank deficiency, contraction and isotropic share") {
    Rng rng(3);

    // collinear 2-d inputs: second coordinate vanishes
    std::vector<Eigen::VectorXd> collinear;
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd p(2);
        p << i * 1.0, i * 2.0;
        collinear.push_back(p);
    }
    const Eigen::MatrixXd coords = pca2d(collinear);
    CHECK(coords.col(1).cwiseAbs().maxCoeff() < 1e-9);

    // projection never expands pairwise distances
    const auto cloud = random_embeddings(rng, 40, 10);
    const Eigen::MatrixXd proj = pca2d(cloud);
    for (int i = 0; i < 40; ++i)
        for (int j = i + 1; j < 40; ++j) {
            const double original = (cloud[static_cast<std::size_t>(i)] -
                                     cloud[static_cast<std::size_t>(j)])
                                        .norm();
            const double reduced = (proj.row(i) - proj.row(j)).norm();
            CHECK(reduced <= original + 1e-12);
        }

    // isotropic cloud: top-2 explained share close to 2/d
    const int n = 2000, d = 32;
    const auto iso = random_embeddings(rng, n, d);
    const Eigen::MatrixXd iso_proj = pca2d(iso);
    double total = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& e : iso) mean += e;
    mean /= n;
    for (const auto& e : iso) total += (e - mean).squaredNorm();
    const double share = iso_proj.squaredNorm() / total;
    CHECK(share > (2.0 / d) * 0.5);
    CHECK(share < (2.0 / d) * 1.5);

    // errors
    CHECK_THROWS_AS(pca2d({cloud[0], cloud[1]}), ConfigError);
    std::vector<Eigen::VectorXd> flat(5, Eigen::VectorXd::Zero(3));
    CHECK_THROWS_AS(pca2d(flat), NumericError);
}
