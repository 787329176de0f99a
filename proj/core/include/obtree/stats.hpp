#ifndef OBTREE_STATS_HPP
#define OBTREE_STATS_HPP

#include <cstddef>
#include <vector>

namespace obtree {

/// Regularized incomplete beta I_x(a, b) for a, b > 0, x in [0,1], by the
/// Lentz continued-fraction method; relative accuracy 1e-10.
double regularized_incomplete_beta(double a, double b, double x);

/// Student's t CDF with `dof` degrees of freedom, via I_x(dof/2, 1/2).
double students_t_cdf(double t, double dof);

/// Inverse of students_t_cdf in t (bisection to 1e-12 in probability).
/// p must lie in (0, 1).
double students_t_quantile(double p, double dof);

/// Ranks of `values` with larger-is-better order: best gets rank 1, ties
/// share the mean of the ranks they cover.
std::vector<double> rank_descending(const std::vector<double>& values);

} // namespace obtree

#endif // OBTREE_STATS_HPP
