#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace archemb {

/// Throws NumericError when either input is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

/// Tie-adjusted tau-b, computed by merge-sort inversion counting
/// (O(n log n)); the unit tests compare it against the O(n^2) pair oracle.
double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b);

/// One-sided permutation p-value of stat(a, b) against shuffles of b:
/// p = (1 + #{stat(a, perm(b)) >= observed}) / (n_perm + 1).
double permutation_p_greater(const std::vector<double>& a, const std::vector<double>& b,
                             const std::function<double(const std::vector<double>&,
                                                        const std::vector<double>&)>& stat,
                             int n_perm, std::uint64_t seed);

struct WilcoxonResult {
    double w_plus = 0.0;          // rank sum of positive differences
    double p_greater = 1.0;       // one-sided: x tends larger than y
    double p_two_sided = 1.0;
    int n_effective = 0;          // pairs left after dropping zero differences
};

/// Paired signed-rank test with midranks for ties. Exact null distribution
/// (sign-flip enumeration via dynamic programming) for n <= 30, normal
/// approximation beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);

double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v);  // sample standard deviation

}  // namespace archemb
