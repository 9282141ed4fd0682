#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace archemb {

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 12;
    int min_leaf = 2;
    int max_features = 0;  // 0: ceil(d / 3)
    bool bootstrap = true;
};

/// Regression forest with variance-reduction splits. Rows are canonicalized
/// (sorted) before bootstrap so predictions do not depend on input order.
class ForestModel {
  public:
    static ForestModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           std::uint64_t seed, const ForestConfig& cfg = {});

    double predict_one(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

    int n_trees() const { return static_cast<int>(trees_.size()); }

  private:
    struct Node {
        int feature = -1;  // -1: leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };
    std::vector<std::vector<Node>> trees_;
};

}  // namespace archemb
