#include "obtree/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "obtree/error.hpp"

namespace obtree {

// Householder QR with column pivoting on the working copy R (m x k).
// Pivots by largest remaining column norm; diagonal magnitudes then come
// out non-increasing, so |R_00| / |R_jj| is a usable condition proxy.
LstsqResult qr_least_squares(const Matrix& A, const std::vector<double>& b,
                             double cond_threshold) {
    std::size_t m = A.rows();
    std::size_t k = A.cols();
    if (m == 0 || k == 0) throw Error::internal("lstsq: empty system");
    if (b.size() != m) throw Error::internal("lstsq: row mismatch");

    Matrix R = A;
    std::vector<double> qtb = b;
    std::vector<std::size_t> perm(k);
    for (std::size_t j = 0; j < k; ++j) perm[j] = j;

    std::size_t steps = std::min(m, k);
    std::vector<double> v(m);
    double r00 = 0.0;
    std::size_t rank = steps;
    for (std::size_t s = 0; s < steps; ++s) {
        // Pivot: bring the largest remaining column (by norm below row s) in.
        std::size_t best = s;
        double best_norm = -1.0;
        for (std::size_t j = s; j < k; ++j) {
            double nrm = 0.0;
            for (std::size_t i = s; i < m; ++i) nrm += R(i, j) * R(i, j);
            if (nrm > best_norm) {
                best_norm = nrm;
                best = j;
            }
        }
        if (best != s) {
            for (std::size_t i = 0; i < m; ++i) std::swap(R(i, s), R(i, best));
            std::swap(perm[s], perm[best]);
        }

        // Householder vector for column s.
        double norm = std::sqrt(best_norm);
        if (s == 0) r00 = norm;
        if (norm == 0.0 || (r00 > 0.0 && r00 / norm >= cond_threshold)) {
            rank = s;
            break;
        }
        double alpha = R(s, s) >= 0.0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (std::size_t i = s; i < m; ++i) {
            v[i] = R(i, s);
            vnorm2 += v[i] * v[i];
        }
        v[s] -= alpha;
        vnorm2 += alpha * alpha - 2.0 * alpha * R(s, s);
        if (vnorm2 <= 0.0) { // column already zero below the diagonal
            R(s, s) = alpha;
            continue;
        }
        // Reflect R(s.., s..) and qtb.
        for (std::size_t j = s; j < k; ++j) {
            double d = 0.0;
            for (std::size_t i = s; i < m; ++i) d += v[i] * R(i, j);
            d = 2.0 * d / vnorm2;
            for (std::size_t i = s; i < m; ++i) R(i, j) -= d * v[i];
        }
        double d = 0.0;
        for (std::size_t i = s; i < m; ++i) d += v[i] * qtb[i];
        d = 2.0 * d / vnorm2;
        for (std::size_t i = s; i < m; ++i) qtb[i] -= d * v[i];
        R(s, s) = alpha; // exact value; the column below is zero by construction
    }

    LstsqResult res;
    res.full_rank = rank == k;
    double rlast = rank > 0 ? std::abs(R(rank - 1, rank - 1)) : 0.0;
    res.diag_ratio = rank == 0          ? std::numeric_limits<double>::infinity()
                     : rlast > 0.0      ? std::abs(r00) / rlast
                                        : std::numeric_limits<double>::infinity();
    if (rank < std::min(m, k)) res.diag_ratio = std::numeric_limits<double>::infinity();

    // Back-substitute over the leading rank x rank block; truncated
    // columns get zero.
    std::vector<double> xp(k, 0.0);
    for (std::size_t ii = rank; ii > 0; --ii) {
        std::size_t i = ii - 1;
        double acc = qtb[i];
        for (std::size_t j = ii; j < rank; ++j) acc -= R(i, j) * xp[j];
        xp[i] = acc / R(i, i);
    }
    res.x.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) res.x[perm[j]] = xp[j];
    return res;
}

std::vector<double> ridge_least_squares(const Matrix& A, const std::vector<double>& b,
                                        const std::vector<double>& penalty) {
    std::size_t m = A.rows();
    std::size_t k = A.cols();
    if (penalty.size() != k) throw Error::internal("ridge: penalty size mismatch");
    // Augment with sqrt(penalty_j) e_j rows; the system is then full rank
    // in every penalized column.
    Matrix aug(m + k, k);
    std::vector<double> baug(m + k, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < k; ++j) aug(i, j) = A(i, j);
        baug[i] = b[i];
    }
    for (std::size_t j = 0; j < k; ++j) aug(m + j, j) = std::sqrt(penalty[j]);
    // No truncation here: let the proxy threshold be effectively infinite
    // so even a zero unpenalized column only zeroes itself.
    LstsqResult res = qr_least_squares(aug, baug, std::numeric_limits<double>::infinity());
    return res.x;
}

} // namespace obtree
