#include "obtree/softgrad.hpp"

#include <cmath>
#include <string>

#include "obtree/error.hpp"

namespace obtree {

// exp(-x) for x >= 37 is below one ulp of 1.0, so the sigmoid rounds to
// an exact 0.0 or 1.0 there anyway; cutting early keeps exp() off the hot
// path for saturated nodes and makes the saturated gradient exactly zero.
namespace {
constexpr double kSatCut = 37.0;
}

double scaled_sigmoid(double z, double alpha) {
    double az = alpha * z;
    if (az >= kSatCut) return 1.0;
    if (az <= -kSatCut) return 0.0;
    return 1.0 / (1.0 + std::exp(-az));
}

double scaled_sigmoid_grad(double z, double alpha) {
    double s = scaled_sigmoid(z, alpha);
    return alpha * s * (1.0 - s);
}

SoftEvaluator::SoftEvaluator(const Matrix& X, const std::vector<double>& y)
    : n_(X.rows()), p_(X.cols()), xt_(X.transposed()), y_(y) {
    if (X.rows() != y.size()) throw Error::user("softgrad: feature/target row mismatch");
}

void SoftEvaluator::ensure_capacity(const ObliqueTree& tree) {
    if (tree.p != p_) throw Error::user("softgrad: feature count mismatch");
    if (tree.depth == depth_) return;
    depth_ = tree.depth;
    ihat_.assign(num_branch_nodes(depth_) * n_, 0.0);
    q_.assign(num_nodes(depth_) * n_, 0.0);
    g_.assign(num_nodes(depth_) * n_, 0.0);
    resid_.assign(num_leaves(depth_) * n_, 0.0);
}

// Shared forward pass. Fills ihat_ (branch sigmoids, or 0/1 indicators in
// hard mode), q_ (reach weights), resid_ (leaf residuals), and returns the
// loss. Layout is node-major: node t occupies [(t-1)*n, t*n).
double SoftEvaluator::forward(const ObliqueTree& tree, double alpha,
                              const RegularizationConfig& reg, bool hard) {
    ensure_capacity(tree);
    std::size_t n = n_;
    std::size_t branches = num_branch_nodes(depth_);
    std::size_t leaves = num_leaves(depth_);
    std::size_t fl = first_leaf(depth_);

    // z = b - a.x per branch node, accumulated feature-major so the inner
    // loops run over contiguous samples.
    for (std::size_t b = 0; b < branches; ++b) {
        double* zrow = &ihat_[b * n];
        double bt = tree.split_thresholds[b];
        for (std::size_t i = 0; i < n; ++i) zrow[i] = bt;
        for (std::size_t j = 0; j < p_; ++j) {
            double a = tree.split_weights(b, j);
            if (a == 0.0) continue;
            const double* xj = &xt_(j, 0);
            for (std::size_t i = 0; i < n; ++i) zrow[i] -= a * xj[i];
        }
        if (hard) {
            for (std::size_t i = 0; i < n; ++i) zrow[i] = zrow[i] > 0.0 ? 1.0 : 0.0;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double az = alpha * zrow[i];
                if (az >= kSatCut)
                    zrow[i] = 1.0;
                else if (az <= -kSatCut)
                    zrow[i] = 0.0;
                else
                    zrow[i] = 1.0 / (1.0 + std::exp(-az));
            }
        }
    }

    // Reach weights down the tree: q_1 = 1, q_2t = q_t * I_t,
    // q_2t+1 = q_t * (1 - I_t).
    for (std::size_t i = 0; i < n; ++i) q_[i] = 1.0;
    for (std::size_t t = 1; t <= branches; ++t) {
        const double* qt = &q_[(t - 1) * n];
        const double* it = &ihat_[(t - 1) * n];
        double* ql = &q_[(left_child(t) - 1) * n];
        double* qr = &q_[(right_child(t) - 1) * n];
        for (std::size_t i = 0; i < n; ++i) {
            double q = qt[i];
            double s = it[i];
            ql[i] = q * s;
            qr[i] = q * (1.0 - s);
        }
    }

    // Leaf residuals and the loss.
    double loss = 0.0;
    for (std::size_t li = 0; li < leaves; ++li) {
        double* r = &resid_[li * n];
        double h = tree.leaf_intercepts[li];
        for (std::size_t i = 0; i < n; ++i) r[i] = y_[i] - h;
        if (tree.leaf_mode == LeafMode::linear) {
            for (std::size_t j = 0; j < p_; ++j) {
                double k = tree.leaf_coeffs(li, j);
                if (k == 0.0) continue;
                const double* xj = &xt_(j, 0);
                for (std::size_t i = 0; i < n; ++i) r[i] -= k * xj[i];
            }
        }
        const double* ql = &q_[(fl + li - 1) * n];
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += ql[i] * r[i] * r[i];
        loss += acc;
    }

    if (reg.lambda > 0.0) {
        double l1 = 0.0;
        for (double a : tree.split_weights.storage()) l1 += std::abs(a);
        loss += reg.lambda * l1;
    }
    return loss;
}

namespace {

// Secondary diagnostic pass: locate the first branch node with a
// non-finite pre-activation, for the error message only.
std::size_t first_bad_node(const ObliqueTree& tree, const Matrix& X) {
    for (std::size_t b = 0; b < tree.branch_count(); ++b) {
        for (std::size_t i = 0; i < X.rows(); ++i) {
            double z = tree.split_thresholds[b] - dot(tree.split_weights.row(b), X.row(i));
            if (!std::isfinite(z)) return b + 1;
        }
    }
    for (std::size_t li = 0; li < tree.leaf_count(); ++li) {
        if (!std::isfinite(tree.leaf_intercepts[li])) return first_leaf(tree.depth) + li;
        for (std::size_t j = 0; j < tree.p; ++j)
            if (!std::isfinite(tree.leaf_coeffs(li, j))) return first_leaf(tree.depth) + li;
    }
    return 0;
}

} // namespace

double SoftEvaluator::loss(const ObliqueTree& tree, double alpha, const RegularizationConfig& reg) {
    return forward(tree, alpha, reg, /*hard=*/false);
}

double SoftEvaluator::hard_sse(const ObliqueTree& tree) {
    return forward(tree, 0.0, RegularizationConfig{}, /*hard=*/true);
}

double SoftEvaluator::loss_and_grad(const ObliqueTree& tree, double alpha,
                                    const RegularizationConfig& reg, SoftEvaluation& out,
                                    bool want_routing) {
    double loss = forward(tree, alpha, reg, /*hard=*/false);
    std::size_t n = n_;
    std::size_t branches = num_branch_nodes(depth_);
    std::size_t leaves = num_leaves(depth_);
    std::size_t fl = first_leaf(depth_);

    out.loss = loss;
    if (out.grad_A.rows() != branches || out.grad_A.cols() != p_) out.grad_A = Matrix(branches, p_);
    if (out.grad_b.size() != branches) out.grad_b.assign(branches, 0.0);
    if (out.grad_K.rows() != leaves || out.grad_K.cols() != p_) out.grad_K = Matrix(leaves, p_);
    out.grad_K.fill(0.0);
    if (out.grad_h.size() != leaves) out.grad_h.assign(leaves, 0.0);

    // Leaf gradients and the backward seed g_leaf = r^2.
    for (std::size_t li = 0; li < leaves; ++li) {
        const double* r = &resid_[li * n];
        const double* ql = &q_[(fl + li - 1) * n];
        double* gl = &g_[(fl + li - 1) * n];
        double gh = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            gl[i] = r[i] * r[i];
            gh += ql[i] * r[i];
        }
        out.grad_h[li] = -2.0 * gh;
        if (tree.leaf_mode == LeafMode::linear) {
            for (std::size_t j = 0; j < p_; ++j) {
                const double* xj = &xt_(j, 0);
                double gk = 0.0;
                for (std::size_t i = 0; i < n; ++i) gk += ql[i] * r[i] * xj[i];
                out.grad_K(li, j) = -2.0 * gk;
            }
        }
    }

    // Fold g upward; at each branch the exposure dL/dI_t = q_t (g_L - g_R)
    // is exactly the ancestor-product sum with node t's own factor
    // excluded, computed without any division by (possibly saturated)
    // sigmoid values. The residual buffer is free by now and holds the
    // per-sample chain factor dL/dz_t.
    double* dldz = &resid_[0];
    for (std::size_t t = branches; t >= 1; --t) {
        const double* it = &ihat_[(t - 1) * n];
        const double* qt = &q_[(t - 1) * n];
        const double* gl = &g_[(left_child(t) - 1) * n];
        const double* gr = &g_[(right_child(t) - 1) * n];
        double* gt = &g_[(t - 1) * n];
        double gb = 0.0;
        // dI/dz = alpha s (1-s); dz/db = 1, dz/da_j = -x_j.
        for (std::size_t i = 0; i < n; ++i) {
            double s = it[i];
            gt[i] = s * gl[i] + (1.0 - s) * gr[i];
            double d = qt[i] * (gl[i] - gr[i]) * alpha * s * (1.0 - s);
            dldz[i] = d;
            gb += d;
        }
        out.grad_b[t - 1] = gb;
        for (std::size_t j = 0; j < p_; ++j) {
            const double* xj = &xt_(j, 0);
            double ga = 0.0;
            for (std::size_t i = 0; i < n; ++i) ga -= dldz[i] * xj[i];
            out.grad_A(t - 1, j) = ga;
        }
    }

    if (reg.lambda > 0.0) {
        for (std::size_t b = 0; b < branches; ++b)
            for (std::size_t j = 0; j < p_; ++j) {
                double a = tree.split_weights(b, j);
                if (a > 0.0)
                    out.grad_A(b, j) += reg.lambda;
                else if (a < 0.0)
                    out.grad_A(b, j) -= reg.lambda; // subgradient 0 at a == 0
            }
    }

    if (want_routing) {
        out.soft_routing.mode = RoutingMode::soft;
        out.soft_routing.n = n;
        out.soft_routing.leaves = leaves;
        out.soft_routing.weights.resize(n * leaves);
        for (std::size_t li = 0; li < leaves; ++li) {
            const double* ql = &q_[(fl + li - 1) * n];
            for (std::size_t i = 0; i < n; ++i) out.soft_routing.weights[i * leaves + li] = ql[i];
        }
    }
    return loss;
}

RoutingMatrix soft_route(const ObliqueTree& tree, const Matrix& X, double alpha) {
    std::vector<double> dummy_y(X.rows(), 0.0);
    SoftEvaluator ev(X, dummy_y);
    SoftEvaluation eval;
    ev.loss_and_grad(tree, alpha, RegularizationConfig{}, eval, /*want_routing=*/true);
    return std::move(eval.soft_routing);
}

double soft_loss(const ObliqueTree& tree, const Dataset& ds, double alpha,
                 const RegularizationConfig& reg) {
    SoftEvaluator ev(ds.features, ds.targets);
    double loss = ev.loss(tree, alpha, reg);
    if (!std::isfinite(loss)) {
        std::size_t node = first_bad_node(tree, ds.features);
        throw Error::internal("softgrad: non-finite loss (node " + std::to_string(node) + ")");
    }
    return loss;
}

SoftEvaluation soft_loss_and_grad(const ObliqueTree& tree, const Dataset& ds, double alpha,
                                  const RegularizationConfig& reg) {
    SoftEvaluator ev(ds.features, ds.targets);
    SoftEvaluation out;
    ev.loss_and_grad(tree, alpha, reg, out, /*want_routing=*/true);
    bool finite = std::isfinite(out.loss);
    for (double v : out.grad_A.storage()) finite = finite && std::isfinite(v);
    for (double v : out.grad_b) finite = finite && std::isfinite(v);
    for (double v : out.grad_K.storage()) finite = finite && std::isfinite(v);
    for (double v : out.grad_h) finite = finite && std::isfinite(v);
    if (!finite) {
        std::size_t node = first_bad_node(tree, ds.features);
        throw Error::internal("softgrad: non-finite evaluation (node " + std::to_string(node) +
                              ")");
    }
    return out;
}

} // namespace obtree
