#include "obtree/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "obtree/error.hpp"

namespace obtree {
namespace {

// Continued fraction for I_x(a,b) by the modified Lentz method. Converges
// quickly only for x < (a+1)/(a+b+2); the symmetry relation covers the rest.
double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 1e-14;
    constexpr double fpmin = 1e-300;

    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw Error::internal("stats: incomplete beta did not converge");
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error::internal("stats: beta parameters must be positive");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double students_t_cdf(double t, double dof) {
    if (dof <= 0.0) throw Error::internal("stats: dof must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    double x = dof / (dof + t * t);
    double tail = 0.5 * regularized_incomplete_beta(0.5 * dof, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double students_t_quantile(double p, double dof) {
    if (!(p > 0.0) || !(p < 1.0)) throw Error::internal("stats: quantile needs p in (0,1)");
    // CDF is monotone; bisect on a bracket grown to cover p.
    double lo = -1.0, hi = 1.0;
    while (students_t_cdf(lo, dof) > p) lo *= 2.0;
    while (students_t_cdf(hi, dof) < p) hi *= 2.0;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        double c = students_t_cdf(mid, dof);
        if (std::abs(c - p) < 1e-12 && hi - lo < 1e-10) return mid;
        if (c < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> rank_descending(const std::vector<double>& values) {
    std::size_t m = values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    std::vector<double> ranks(m, 0.0);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
        double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0; // ranks are 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

} // namespace obtree
