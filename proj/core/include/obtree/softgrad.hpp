#ifndef OBTREE_SOFTGRAD_HPP
#define OBTREE_SOFTGRAD_HPP

#include <vector>

#include "obtree/dataset.hpp"
#include "obtree/matrix.hpp"
#include "obtree/tree.hpp"

namespace obtree {

struct RegularizationConfig {
    double lambda = 0.0; // L1 strength on split weights; 0 disables
};

/// Loss, analytic gradients, and the soft routing that produced them.
/// grad_K stays all-zero in constant mode (K is not trained there).
struct SoftEvaluation {
    double loss = 0.0;
    Matrix grad_A;               // (2^D - 1) x p
    std::vector<double> grad_b;  // 2^D - 1
    Matrix grad_K;               // 2^D x p
    std::vector<double> grad_h;  // 2^D
    RoutingMatrix soft_routing;  // mode soft, rows sum to 1 within 1e-10
};

/// 1/(1 + exp(-alpha z)). Saturates to exact 0.0/1.0 once |alpha z|
/// exceeds the width of a double's mantissa, so no overflow for any
/// finite input.
double scaled_sigmoid(double z, double alpha);

/// d/dz of scaled_sigmoid = alpha s (1 - s); exactly 0 when saturated.
double scaled_sigmoid_grad(double z, double alpha);

/// Soft routing: the ancestor-set product with the indicator replaced by
/// the scaled sigmoid of b - a.x.
RoutingMatrix soft_route(const ObliqueTree& tree, const Matrix& X, double alpha);

/// Soft loss only: sum_i sum_t P_{i,t} (y_i - (k_t.x_i + h_t))^2
/// + lambda sum_t |a_t|_1.
double soft_loss(const ObliqueTree& tree, const Dataset& ds, double alpha,
                 const RegularizationConfig& reg = {});

/// Loss plus exact analytic gradients for every trainable parameter (L1
/// subgradient on a: sign componentwise, 0 at 0). Errors (Error::internal,
/// naming a node) if a non-finite intermediate appears.
SoftEvaluation soft_loss_and_grad(const ObliqueTree& tree, const Dataset& ds, double alpha,
                                  const RegularizationConfig& reg = {});

/// Reusable evaluator bound to one dataset: owns the transposed feature
/// copy and per-node work buffers so repeated evaluation (the training
/// inner loop) never reallocates. Methods are not thread-safe on a shared
/// instance; give each worker its own.
class SoftEvaluator {
  public:
    SoftEvaluator(const Matrix& X, const std::vector<double>& y);

    std::size_t n() const { return n_; }
    std::size_t p() const { return p_; }

    /// Loss only; skips the backward pass.
    double loss(const ObliqueTree& tree, double alpha, const RegularizationConfig& reg);

    /// Loss + gradients into `out` (resized on shape change). `out.soft_routing`
    /// is filled only when want_routing is set; training loops skip it.
    double loss_and_grad(const ObliqueTree& tree, double alpha, const RegularizationConfig& reg,
                         SoftEvaluation& out, bool want_routing = false);

    /// Hard-split SSE via the same buffers (used between gradient phases).
    double hard_sse(const ObliqueTree& tree);

  private:
    void ensure_capacity(const ObliqueTree& tree);
    double forward(const ObliqueTree& tree, double alpha, const RegularizationConfig& reg,
                   bool hard);

    std::size_t n_ = 0;
    std::size_t p_ = 0;
    Matrix xt_;                     // p x n, feature-major
    std::vector<double> y_;
    int depth_ = -1;                // shape the buffers are sized for
    std::vector<double> ihat_;      // branch-major: (t-1)*n + i
    std::vector<double> q_;         // node-major reach probabilities
    std::vector<double> g_;         // node-major backward values
    std::vector<double> resid_;     // leaf-major residuals
};

} // namespace obtree

#endif // OBTREE_SOFTGRAD_HPP
