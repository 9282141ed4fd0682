#include "archemb/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();  // weighted SSE
};

}  // namespace

ForestModel ForestModel::fit(const Eigen::MatrixXd& x_in, const Eigen::VectorXd& y_in,
                             std::uint64_t seed, const ForestConfig& cfg) {
    const Eigen::Index n = x_in.rows();
    if (n < 1 || y_in.size() != n) throw ConfigError("forest fit: empty or mismatched input");
    const int d = static_cast<int>(x_in.cols());
    const int max_features =
        cfg.max_features > 0 ? std::min(cfg.max_features, d)
                             : static_cast<int>(std::ceil(static_cast<double>(d) / 3.0));

    // canonical row order: lexicographic by features then target, so that
    // bootstrap indices refer to a permutation-invariant ordering
    std::vector<Eigen::Index> canon(static_cast<std::size_t>(n));
    std::iota(canon.begin(), canon.end(), 0);
    std::sort(canon.begin(), canon.end(), [&](Eigen::Index i, Eigen::Index j) {
        for (int f = 0; f < d; ++f) {
            if (x_in(i, f) != x_in(j, f)) return x_in(i, f) < x_in(j, f);
        }
        return y_in(i) < y_in(j);
    });
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        x.row(r) = x_in.row(canon[static_cast<std::size_t>(r)]);
        y[r] = y_in[canon[static_cast<std::size_t>(r)]];
    }

    ForestModel model;
    model.trees_.resize(static_cast<std::size_t>(cfg.n_trees));

    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng(derive_seed("forest.tree", seed, static_cast<std::uint64_t>(t)));
        std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
        if (cfg.bootstrap) {
            for (auto& r : rows) r = static_cast<Eigen::Index>(rng.uniform_index(n));
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }

        auto& nodes = model.trees_[static_cast<std::size_t>(t)];

        // finds the best variance-reduction split over the given features
        auto best_split = [&](const std::vector<Eigen::Index>& members,
                              const std::vector<int>& features) {
            Split best;
            std::vector<std::pair<double, double>> col(members.size());
            for (const int f : features) {
                for (std::size_t i = 0; i < members.size(); ++i)
                    col[i] = {x(members[i], f), y[members[i]]};
                std::sort(col.begin(), col.end());
                double right_sum = 0.0, right_sq = 0.0;
                for (const auto& [xv, yv] : col) {
                    right_sum += yv;
                    right_sq += yv * yv;
                }
                double left_sum = 0.0, left_sq = 0.0;
                const std::size_t m = col.size();
                for (std::size_t i = 0; i + 1 < m; ++i) {
                    left_sum += col[i].second;
                    left_sq += col[i].second * col[i].second;
                    right_sum -= col[i].second;
                    right_sq -= col[i].second * col[i].second;
                    if (col[i].first == col[i + 1].first) continue;  // no boundary here
                    const std::size_t nl = i + 1, nr = m - nl;
                    if (nl < static_cast<std::size_t>(cfg.min_leaf) ||
                        nr < static_cast<std::size_t>(cfg.min_leaf))
                        continue;
                    const double sse_left = left_sq - left_sum * left_sum / static_cast<double>(nl);
                    const double sse_right =
                        right_sq - right_sum * right_sum / static_cast<double>(nr);
                    const double score = sse_left + sse_right;
                    if (score < best.score) {
                        best.score = score;
                        best.feature = f;
                        best.threshold = 0.5 * (col[i].first + col[i + 1].first);
                    }
                }
            }
            return best;
        };

        // recursive build over row-index subsets
        auto build = [&](auto&& self, std::vector<Eigen::Index> members, int depth) -> int {
            const int id = static_cast<int>(nodes.size());
            nodes.push_back({});
            double sum = 0.0;
            for (const Eigen::Index r : members) sum += y[r];
            nodes[static_cast<std::size_t>(id)].value = sum / static_cast<double>(members.size());

            if (depth >= cfg.max_depth ||
                members.size() < 2 * static_cast<std::size_t>(cfg.min_leaf))
                return id;
            bool constant_y = true;
            for (const Eigen::Index r : members)
                if (y[r] != y[members.front()]) {
                    constant_y = false;
                    break;
                }
            if (constant_y) return id;

            std::vector<int> features;
            for (const std::size_t f : rng.sample_without_replacement(
                     static_cast<std::size_t>(d), static_cast<std::size_t>(max_features)))
                features.push_back(static_cast<int>(f));
            Split split = best_split(members, features);
            if (split.feature < 0 && max_features < d) {
                // sampled features were unsplittable; retry with all of them
                std::vector<int> all(static_cast<std::size_t>(d));
                std::iota(all.begin(), all.end(), 0);
                split = best_split(members, all);
            }
            if (split.feature < 0) return id;

            std::vector<Eigen::Index> left, right;
            for (const Eigen::Index r : members) {
                (x(r, split.feature) <= split.threshold ? left : right).push_back(r);
            }
            members.clear();
            members.shrink_to_fit();
            nodes[static_cast<std::size_t>(id)].feature = split.feature;
            nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
            const int left_id = self(self, std::move(left), depth + 1);
            nodes[static_cast<std::size_t>(id)].left = left_id;
            const int right_id = self(self, std::move(right), depth + 1);
            nodes[static_cast<std::size_t>(id)].right = right_id;
            return id;
        };
        build(build, std::move(rows), 0);
    }
    return model;
}

double ForestModel::predict_one(const Eigen::VectorXd& x) const {
    double sum = 0.0;
    for (const auto& nodes : trees_) {
        int id = 0;
        while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
            const auto& node = nodes[static_cast<std::size_t>(id)];
            id = x[node.feature] <= node.threshold ? node.left : node.right;
        }
        sum += nodes[static_cast<std::size_t>(id)].value;
    }
    return sum / static_cast<double>(trees_.size());
}

Eigen::VectorXd ForestModel::predict(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out[r] = predict_one(x.row(r));
    return out;
}

}  // namespace archemb
