#ifndef OBTREE_LINALG_HPP
#define OBTREE_LINALG_HPP

#include <vector>

#include "obtree/matrix.hpp"

namespace obtree {

/// Outcome of a pivoted-QR least-squares solve.
struct LstsqResult {
    std::vector<double> x;       // length = cols(A); dependent columns get 0
    double diag_ratio = 0.0;     // |R_00| / |R_kk|, the condition proxy; inf if R_kk = 0
    bool full_rank = true;       // false when diag_ratio exceeded the threshold
};

/// Minimizes |A x - b|_2 by Householder QR with column pivoting. A is
/// m x k with m >= 1; rows may be fewer than columns (the trailing pivoted
/// columns are then treated as dependent and zeroed). `cond_threshold`
/// bounds the acceptable |R_00|/|R_kk| ratio; pivots beyond it are
/// truncated and the result is flagged not full rank.
LstsqResult qr_least_squares(const Matrix& A, const std::vector<double>& b,
                             double cond_threshold = 1e10);

/// Ridge regression min |A x - b|^2 + sum_j penalty[j] x_j^2, solved by QR
/// on the row-augmented system. Entries of `penalty` may be zero to leave
/// a coefficient unpenalized.
std::vector<double> ridge_least_squares(const Matrix& A, const std::vector<double>& b,
                                        const std::vector<double>& penalty);

} // namespace obtree

#endif // OBTREE_LINALG_HPP
