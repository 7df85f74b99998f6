#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library.

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

/// Two-sided normal tail 2 * P(Z > |z|) by composite Simpson integration of
/// the density over [|z|, |z| + 12] in long double.
inline long double two_sided_p(long double z) {
    const long double a = std::fabs(z);
    const long double b = a + 12.0L;
    const int n = 24000;  // even
    const long double h = (b - a) / n;
    const long double c = 1.0L / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
    auto f = [&](long double t) { return c * std::exp(-0.5L * t * t); };
    long double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(a + i * h);
    const long double p = 2.0L * s * h / 3.0L;
    return p > 1.0L ? 1.0L : p;
}

/// O(n^2) pair count: (concordant + ties / 2) / (P N).
inline double brute_auc(const std::vector<double>& scores, const std::vector<double>& labels) {
    long double num = 0, pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1.0) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0.0) continue;
            pairs += 1;
            if (scores[i] > scores[j]) num += 1;
            else if (scores[i] == scores[j]) num += 0.5L;
        }
    }
    return static_cast<double>(num / pairs);
}

/// Smallest c with P(Binomial(n, p) <= c) >= q, from the exact pmf.
inline int binomial_quantile(int n, double p, double q) {
    long double cdf = 0;
    for (int c = 0; c <= n; ++c) {
        const long double log_pmf = std::lgamma(n + 1.0L) - std::lgamma(c + 1.0L) -
                                    std::lgamma(n - c + 1.0L) + c * std::log((long double)p) +
                                    (n - c) * std::log1p(-(long double)p);
        cdf += std::exp(log_pmf);
        if (cdf >= q) return c;
    }
    return n;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace oracle
