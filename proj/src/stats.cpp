#include "archemb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "archemb/errors.hpp"
#include "archemb/rng.hpp"

namespace archemb {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2) throw ConfigError("pearson: bad input sizes");
    const double ma = mean_of(a), mb = mean_of(b);
    double cab = 0.0, caa = 0.0, cbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cab += (a[i] - ma) * (b[i] - mb);
        caa += (a[i] - ma) * (a[i] - ma);
        cbb += (b[i] - mb) * (b[i] - mb);
    }
    if (caa == 0.0 || cbb == 0.0)
        throw NumericError("pearson undefined for constant input");
    return cab / std::sqrt(caa * cbb);
}

namespace {

/// Inversions of v counted by merge sort; equal elements are not inversions.
long long count_inversions(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> buffer(n);
    long long inversions = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[i] <= v[j]) {
                    buffer[k++] = v[i++];
                } else {
                    inversions += static_cast<long long>(mid - i);
                    buffer[k++] = v[j++];
                }
            }
            while (i < mid) buffer[k++] = v[i++];
            while (j < hi) buffer[k++] = v[j++];
            std::copy(buffer.begin() + static_cast<long>(lo), buffer.begin() + static_cast<long>(hi),
                      v.begin() + static_cast<long>(lo));
        }
    }
    return inversions;
}

long long tie_pairs(std::vector<double> sorted) {
    long long pairs = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const long long t = static_cast<long long>(j - i);
        pairs += t * (t - 1) / 2;
        i = j;
    }
    return pairs;
}

}  // namespace

double kendall_tau_b(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    if (n != b.size() || n < 2) throw ConfigError("kendall_tau_b: bad input sizes");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return a[i] != a[j] ? a[i] < a[j] : b[i] < b[j];
    });

    const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;

    // tie counts in a, b and joint
    long long n1 = 0, n3 = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && a[idx[j]] == a[idx[i]]) ++j;
            const long long t = static_cast<long long>(j - i);
            n1 += t * (t - 1) / 2;
            std::size_t p = i;
            while (p < j) {
                std::size_t q = p;
                while (q < j && b[idx[q]] == b[idx[p]]) ++q;
                const long long u = static_cast<long long>(q - p);
                n3 += u * (u - 1) / 2;
                p = q;
            }
            i = j;
        }
    }
    std::vector<double> b_sorted_by_a(n);
    for (std::size_t i = 0; i < n; ++i) b_sorted_by_a[i] = b[idx[i]];
    const long long discordant = count_inversions(b_sorted_by_a);  // sorts its input
    const long long n2 = tie_pairs(b_sorted_by_a);

    const long long comparable = n0 - n1 - n2 + n3;
    const long long concordant = comparable - discordant;
    const double denom =
        std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
    if (denom == 0.0) throw NumericError("kendall_tau_b undefined for constant input");
    return static_cast<double>(concordant - discordant) / denom;
}

double permutation_p_greater(const std::vector<double>& a, const std::vector<double>& b,
                             const std::function<double(const std::vector<double>&,
                                                        const std::vector<double>&)>& stat,
                             int n_perm, std::uint64_t seed) {
    const double observed = stat(a, b);
    Rng rng(derive_seed("stats.permutation", seed));
    std::vector<double> shuffled = b;
    int hits = 0;
    for (int p = 0; p < n_perm; ++p) {
        rng.shuffle(shuffled);
        if (stat(a, shuffled) >= observed) ++hits;
    }
    return (1.0 + hits) / (static_cast<double>(n_perm) + 1.0);
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty()) throw ConfigError("wilcoxon: bad input sizes");

    std::vector<double> abs_d;
    std::vector<int> sign;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d == 0.0) continue;  // zero differences dropped
        abs_d.push_back(std::abs(d));
        sign.push_back(d > 0.0 ? 1 : -1);
    }
    WilcoxonResult out;
    out.n_effective = static_cast<int>(abs_d.size());
    if (abs_d.empty()) return out;
    const std::size_t n = abs_d.size();

    // midranks of |d|
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t i, std::size_t j) { return abs_d[i] < abs_d[j]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && abs_d[idx[j]] == abs_d[idx[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
        for (std::size_t p = i; p < j; ++p) rank[idx[p]] = mid;
        i = j;
    }

    double w_plus = 0.0;
    for (std::size_t p = 0; p < n; ++p)
        if (sign[p] > 0) w_plus += rank[p];
    out.w_plus = w_plus;

    if (n <= 30) {
        // exact sign-flip null: DP over doubled ranks (midranks are halves)
        std::vector<long long> scaled(n);
        long long total = 0;
        for (std::size_t p = 0; p < n; ++p) {
            scaled[p] = std::llround(2.0 * rank[p]);
            total += scaled[p];
        }
        std::vector<double> dp(static_cast<std::size_t>(total) + 1, 0.0);
        dp[0] = 1.0;
        long long reach = 0;
        for (std::size_t p = 0; p < n; ++p) {
            reach += scaled[p];
            for (long long s = reach; s >= scaled[p]; --s)
                dp[static_cast<std::size_t>(s)] += dp[static_cast<std::size_t>(s - scaled[p])];
        }
        const double denom = std::pow(2.0, static_cast<double>(n));
        const long long observed = std::llround(2.0 * w_plus);
        double ge = 0.0, le = 0.0;
        for (long long s = 0; s <= total; ++s) {
            if (s >= observed) ge += dp[static_cast<std::size_t>(s)];
            if (s <= observed) le += dp[static_cast<std::size_t>(s)];
        }
        out.p_greater = ge / denom;
        out.p_two_sided = std::min(1.0, 2.0 * std::min(ge, le) / denom);
    } else {
        const double nn = static_cast<double>(n);
        const double mean = nn * (nn + 1.0) / 4.0;
        double tie_correction = 0.0;
        i = 0;
        std::sort(abs_d.begin(), abs_d.end());
        while (i < n) {
            std::size_t j = i;
            while (j < n && abs_d[j] == abs_d[i]) ++j;
            const double t = static_cast<double>(j - i);
            tie_correction += t * t * t - t;
            i = j;
        }
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
        const double z = (w_plus - mean - 0.5) / std::sqrt(var);
        out.p_greater = 0.5 * std::erfc(z / std::sqrt(2.0));
        const double z2 = (std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
        out.p_two_sided = std::min(1.0, std::erfc(z2 / std::sqrt(2.0)));
    }
    return out;
}

}  // namespace archemb
