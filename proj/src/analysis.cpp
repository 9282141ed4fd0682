#include "archemb/analysis.hpp"

#include <Eigen/Eigenvalues>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"
#include "archemb/stats.hpp"

namespace archemb {

namespace {

Eigen::MatrixXd stack_rows(const std::vector<Eigen::VectorXd>& rows) {
    if (rows.empty()) throw ConfigError("empty embedding list");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw ConfigError("embedding dimensions disagree");
        m.row(static_cast<Eigen::Index>(i)) = rows[i];
    }
    return m;
}

}  // namespace

PredictivePower predictive_power(const std::vector<Eigen::VectorXd>& embeddings,
                                 const std::vector<double>& accuracies, int n_train,
                                 std::uint64_t seed, const ForestConfig& cfg) {
    const std::size_t n = embeddings.size();
    if (accuracies.size() != n) throw ConfigError("predictive_power: size mismatch");
    if (n_train < 5 || static_cast<std::size_t>(n_train) >= n)
        throw ConfigError("predictive_power: bad train split size");

    Rng rng(derive_seed("analysis.predictive", seed));
    const auto train_idx =
        rng.sample_without_replacement(n, static_cast<std::size_t>(n_train));
    std::vector<char> in_train(n, 0);
    for (const std::size_t i : train_idx) in_train[i] = 1;

    const Eigen::MatrixXd all = stack_rows(embeddings);
    Eigen::MatrixXd x_train(n_train, all.cols());
    Eigen::VectorXd y_train(n_train);
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
        x_train.row(static_cast<Eigen::Index>(r)) = all.row(static_cast<Eigen::Index>(train_idx[r]));
        y_train[static_cast<Eigen::Index>(r)] = accuracies[train_idx[r]];
    }
    const ForestModel forest = ForestModel::fit(x_train, y_train, seed, cfg);

    std::vector<double> predictions, actual;
    for (std::size_t i = 0; i < n; ++i) {
        if (in_train[i]) continue;
        predictions.push_back(forest.predict_one(all.row(static_cast<Eigen::Index>(i))));
        actual.push_back(accuracies[i]);
    }
    PredictivePower out;
    out.pearson = pearson(predictions, actual);
    out.kendall_tau = kendall_tau_b(predictions, actual);
    return out;
}

double EvalOnlyBenchmark::correlate_pearson(const std::vector<double>& predictions) const {
    return pearson(predictions, accuracies_);
}

double EvalOnlyBenchmark::correlate_kendall(const std::vector<double>& predictions) const {
    return kendall_tau_b(predictions, accuracies_);
}

TransferReport transfer_experiment(const SpaceData& a, const SpaceData& b, int n_seeds,
                                   const ForestConfig& cfg) {
    if (a.embeddings.empty() || b.embeddings.empty())
        throw ConfigError("transfer_experiment: empty space data");
    if (a.embeddings[0].size() != b.embeddings[0].size())
        throw ConfigError("transfer_experiment: embedding dimensions disagree");

    TransferReport report;
    const SpaceData* spaces[2] = {&a, &b};
    for (const SpaceData* source : spaces) {
        const Eigen::MatrixXd x_src = stack_rows(source->embeddings);
        Eigen::VectorXd y_src(static_cast<Eigen::Index>(source->accuracies.size()));
        for (std::size_t i = 0; i < source->accuracies.size(); ++i)
            y_src[static_cast<Eigen::Index>(i)] = source->accuracies[i];

        for (const SpaceData* target : spaces) {
            const EvalOnlyBenchmark eval(target->accuracies);
            const Eigen::MatrixXd x_tgt = stack_rows(target->embeddings);
            std::vector<double> pearsons, kendalls;
            for (int seed = 0; seed < n_seeds; ++seed) {
                const ForestModel forest =
                    ForestModel::fit(x_src, y_src, static_cast<std::uint64_t>(seed), cfg);
                const Eigen::VectorXd pred = forest.predict(x_tgt);
                const std::vector<double> predictions(pred.data(), pred.data() + pred.size());
                TransferRow row;
                row.source = source->family;
                row.target = target->family;
                row.seed = seed;
                row.pearson = eval.correlate_pearson(predictions);
                row.kendall_tau = eval.correlate_kendall(predictions);
                pearsons.push_back(row.pearson);
                kendalls.push_back(row.kendall_tau);
                report.rows.push_back(row);
            }
            TransferAggregate agg;
            agg.source = source->family;
            agg.target = target->family;
            agg.pearson_mean = mean_of(pearsons);
            agg.pearson_std = stddev_of(pearsons);
            agg.kendall_mean = mean_of(kendalls);
            agg.kendall_std = stddev_of(kendalls);
            report.aggregates.push_back(agg);
        }
    }
    return report;
}

std::vector<Eigen::VectorXd> evolution_trace(const EncoderParams& enc, const NetworkParams& net,
                                             const std::vector<Checkpoint>& checkpoints,
                                             const ProbeSet& probes, int k, bool normalized,
                                             OutputReduce reduce) {
    std::vector<Eigen::VectorXd> trace;
    trace.reserve(checkpoints.size());
    NetworkParams snapshot = net;
    for (const Checkpoint& weights : checkpoints) {
        snapshot.weights = weights;
        const Edjm edjm = assemble_edjm(snapshot, probes, reduce);
        Projection proj = project(edjm, k);
        if (normalized) proj.epdjm = normalize_psv(proj.epdjm, proj.factors);
        trace.push_back(encode(enc, proj.epdjm));
    }
    return trace;
}

Eigen::MatrixXd pca2d(const std::vector<Eigen::VectorXd>& embeddings) {
    if (embeddings.size() < 3) throw ConfigError("pca2d needs at least 3 points");
    Eigen::MatrixXd m = stack_rows(embeddings);
    if (m.cols() < 2) throw ConfigError("pca2d needs at least 2 input dimensions");
    const Eigen::RowVectorXd mean = m.colwise().mean();
    m.rowwise() -= mean;
    if (m.cwiseAbs().maxCoeff() == 0.0) throw NumericError("pca2d: zero-variance input");

    const Eigen::MatrixXd cov = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericError("pca2d eigendecomposition failed");

    Eigen::MatrixXd directions(m.cols(), 2);
    for (int j = 0; j < 2; ++j) {
        Eigen::VectorXd v = eig.eigenvectors().col(m.cols() - 1 - j);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        directions.col(j) = v;
    }
    return m * directions;
}

}  // namespace archemb
