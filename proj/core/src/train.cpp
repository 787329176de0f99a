#include "obtree/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include "obtree/error.hpp"

namespace obtree {
namespace {

void fnv_mix(std::uint64_t& h, const double* data, std::size_t count) {
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < count * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
}

// Cosine decay with warm restarts, periods lr_period * mult^r.
double scheduled_eta(const TrainConfig& c, int epoch) {
    double t_cur = static_cast<double>(c.lr_period);
    double k = static_cast<double>(epoch);
    while (k >= t_cur) {
        k -= t_cur;
        t_cur *= c.lr_period_mult;
    }
    constexpr double pi = 3.14159265358979323846;
    return c.eta_min + 0.5 * (c.eta0 - c.eta_min) * (1.0 + std::cos(pi * k / t_cur));
}

// Parameter views for uniform update loops: A, b, h always train; K only
// in linear mode.
struct ParamView {
    double* data;
    const double* grad;
    std::size_t count;
};

std::vector<ParamView> trainable(ObliqueTree& t, const SoftEvaluation& g) {
    std::vector<ParamView> v;
    v.push_back({t.split_weights.storage().data(), g.grad_A.storage().data(),
                 t.split_weights.storage().size()});
    v.push_back({t.split_thresholds.data(), g.grad_b.data(), t.split_thresholds.size()});
    if (t.leaf_mode == LeafMode::linear)
        v.push_back({t.leaf_coeffs.storage().data(), g.grad_K.storage().data(),
                     t.leaf_coeffs.storage().size()});
    v.push_back({t.leaf_intercepts.data(), g.grad_h.data(), t.leaf_intercepts.size()});
    return v;
}

struct StartOutcome {
    StartRecord record;
    ObliqueTree best_tree;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_iter = -1; // -1: no candidate
    long long epochs = 0;
};

} // namespace

void TrainConfig::validate() const {
    if (depth < 1) throw Error::user("train: depth must be >= 1");
    if (n_start < 1) throw Error::user("train: n_start must be >= 1");
    if (n_epoch < 1) throw Error::user("train: n_epoch must be >= 1");
    if (!(alpha_small_min > 0.0) || !(alpha_large_min > 0.0))
        throw Error::user("train: alpha ranges must be positive");
    if (alpha_small_min > alpha_small_max || alpha_large_min > alpha_large_max)
        throw Error::user("train: alpha range min exceeds max");
    if (alpha_count < 1) throw Error::user("train: alpha count must be >= 1");
    if (alpha_count != 2 && alpha_small_min > alpha_large_max)
        throw Error::user("train: alpha overall range is empty");
    if (!(eta0 >= 0.0) || !(eta_min >= 0.0)) throw Error::user("train: learning rates must be >= 0");
    if (lr_period < 1) throw Error::user("train: lr_period must be >= 1");
    if (!(lr_period_mult >= 1.0)) throw Error::user("train: lr_period_mult must be >= 1");
    if (!(lambda >= 0.0)) throw Error::user("train: lambda must be >= 0");
    if (threads < 1) throw Error::user("train: threads must be >= 1");
}

std::uint64_t param_fingerprint(const ObliqueTree& tree) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    fnv_mix(h, tree.split_weights.storage().data(), tree.split_weights.storage().size());
    fnv_mix(h, tree.split_thresholds.data(), tree.split_thresholds.size());
    fnv_mix(h, tree.leaf_coeffs.storage().data(), tree.leaf_coeffs.storage().size());
    fnv_mix(h, tree.leaf_intercepts.data(), tree.leaf_intercepts.size());
    return h;
}

ObliqueTree init_tree(int depth, std::size_t p, const Dataset& ds, std::uint64_t seed,
                      LeafMode mode) {
    if (ds.size() == 0) throw Error::user("train: cannot initialize from an empty dataset");
    if (ds.num_features() != p) throw Error::user("train: feature count mismatch");
    Rng rng(seed);
    ObliqueTree t = make_tree(depth, p, mode);
    // Draw order: per branch node, direction then anchor row; then per
    // leaf, intercept noise. Tests re-derive initializations from this.
    for (std::size_t b = 0; b < t.branch_count(); ++b) {
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                double v = rng.normal();
                t.split_weights(b, j) = v;
                norm2 += v * v;
            }
        } while (norm2 == 0.0);
        double inv = 1.0 / std::sqrt(norm2);
        for (std::size_t j = 0; j < p; ++j) t.split_weights(b, j) *= inv;
        std::size_t r = static_cast<std::size_t>(rng.below(ds.size()));
        t.split_thresholds[b] = dot(t.split_weights.row(b), ds.features.row(r));
    }
    double mean_y = 0.0;
    for (double y : ds.targets) mean_y += y;
    mean_y /= static_cast<double>(ds.size());
    for (std::size_t li = 0; li < t.leaf_count(); ++li)
        t.leaf_intercepts[li] = mean_y + rng.uniform(-0.01, 0.01);
    return t;
}

std::vector<double> sample_alpha_schedule(const TrainConfig& config, Rng& rng) {
    std::vector<double> alphas;
    if (config.alpha_count == 2) {
        alphas.push_back(rng.uniform(config.alpha_small_min, config.alpha_small_max));
        alphas.push_back(rng.uniform(config.alpha_large_min, config.alpha_large_max));
    } else {
        double lo = config.alpha_small_min;
        double hi = config.alpha_large_max;
        double width = (hi - lo) / static_cast<double>(config.alpha_count);
        for (int i = 0; i < config.alpha_count; ++i) {
            double a = lo + width * static_cast<double>(i);
            alphas.push_back(rng.uniform(a, a + width));
        }
    }
    std::sort(alphas.begin(), alphas.end());
    return alphas;
}

PhaseResult gradient_descent_phase(const ObliqueTree& tree, const Dataset& ds, double alpha,
                                   const TrainConfig& config) {
    SoftEvaluator ev(ds.features, ds.targets);
    RegularizationConfig reg{config.lambda};
    SoftEvaluation eval;

    // The loss is a sum over samples, so its raw gradient scales with n and a
    // fixed learning rate would diverge on large datasets. Steps therefore use
    // the per-sample (mean) gradient: eta is a per-sample rate, and the
    // descent trajectory is invariant to dataset size.
    const double inv_n = 1.0 / static_cast<double>(ds.size());

    ObliqueTree theta = tree;
    PhaseResult out;
    out.tree = tree;
    out.soft_loss = std::numeric_limits<double>::infinity();

    double loss = ev.loss_and_grad(theta, alpha, reg, eval);
    if (!std::isfinite(loss)) {
        out.aborted_non_finite = true;
        return out; // nothing finite seen; hand back the entry parameters
    }
    out.soft_loss = loss;

    // Adaptive-moment state (only touched when config.adaptive).
    std::vector<std::vector<double>> m1, m2;
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    for (int epoch = 0; epoch < config.n_epoch; ++epoch) {
        double eta = scheduled_eta(config, epoch);
        double step = eta * inv_n;
        auto params = trainable(theta, eval);
        if (config.adaptive) {
            if (m1.empty()) {
                for (auto& pv : params) {
                    m1.emplace_back(pv.count, 0.0);
                    m2.emplace_back(pv.count, 0.0);
                }
            }
            double k = static_cast<double>(epoch + 1);
            double c1 = 1.0 - std::pow(beta1, k);
            double c2 = 1.0 - std::pow(beta2, k);
            for (std::size_t pi = 0; pi < params.size(); ++pi) {
                auto& pv = params[pi];
                for (std::size_t i = 0; i < pv.count; ++i) {
                    double g = pv.grad[i] * inv_n;
                    m1[pi][i] = beta1 * m1[pi][i] + (1.0 - beta1) * g;
                    m2[pi][i] = beta2 * m2[pi][i] + (1.0 - beta2) * g * g;
                    pv.data[i] -= eta * (m1[pi][i] / c1) / (std::sqrt(m2[pi][i] / c2) + adam_eps);
                }
            }
        } else {
            for (auto& pv : params)
                for (std::size_t i = 0; i < pv.count; ++i) pv.data[i] -= step * pv.grad[i];
        }

        loss = ev.loss_and_grad(theta, alpha, reg, eval);
        out.epochs_run = epoch + 1;
        if (!std::isfinite(loss)) {
            out.aborted_non_finite = true;
            return out; // best finite parameters already captured
        }
        if (loss < out.soft_loss) {
            out.soft_loss = loss;
            out.tree = theta;
        }
    }
    return out;
}

namespace {

StartOutcome run_start(int s, const Dataset& ds, const TrainConfig& config,
                       const ObliqueTree* warm) {
    StartOutcome out;
    out.record.start_index = s;
    std::uint64_t seed_s = derive_seed(config.seed, static_cast<std::uint64_t>(s));
    try {
        ObliqueTree tree;
        if (s == 0 && warm != nullptr) {
            if (warm->depth != config.depth || warm->p != ds.num_features() ||
                warm->leaf_mode != config.leaf_mode)
                throw Error::internal("train: warm-start tree shape mismatch");
            tree = *warm;
        } else {
            tree = init_tree(config.depth, ds.num_features(), ds, derive_seed(seed_s, 0),
                             config.leaf_mode);
        }
        Rng schedule_rng(derive_seed(seed_s, 1));
        out.record.alphas = sample_alpha_schedule(config, schedule_rng);

        for (std::size_t ai = 0; ai < out.record.alphas.size(); ++ai) {
            AlphaIterRecord ir;
            ir.alpha = out.record.alphas[ai];
            ir.params_in_fp = param_fingerprint(tree);
            PhaseResult phase = gradient_descent_phase(tree, ds, ir.alpha, config);
            out.epochs += phase.epochs_run;
            ir.epochs_run = phase.epochs_run;
            ir.aborted_non_finite = phase.aborted_non_finite;
            ir.soft_loss = phase.soft_loss;
            tree = std::move(phase.tree);
            refit_leaves(tree, ds);
            ir.candidate_hard_loss = hard_loss(tree, ds.features, ds.targets);
            ir.params_out_fp = param_fingerprint(tree);
            out.record.iters.push_back(ir);
            if (ir.candidate_hard_loss < out.best_loss) {
                out.best_loss = ir.candidate_hard_loss;
                out.best_tree = tree;
                out.best_iter = static_cast<int>(ai);
            }
        }
    } catch (const std::exception& e) {
        out.record.failed = true;
        out.record.error = e.what();
    }
    return out;
}

} // namespace

FitResult fit(const Dataset& ds, const TrainConfig& config, const ObliqueTree* warm) {
    config.validate();
    if (ds.size() == 0) throw Error::user("train: empty dataset");
    auto t0 = std::chrono::steady_clock::now();

    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(config.n_start));
    int workers = std::min(config.threads, config.n_start);
    if (workers <= 1) {
        for (int s = 0; s < config.n_start; ++s)
            outcomes[static_cast<std::size_t>(s)] = run_start(s, ds, config, warm);
    } else {
        std::atomic<int> next{0};
        auto body = [&] {
            for (int s = next.fetch_add(1); s < config.n_start; s = next.fetch_add(1))
                outcomes[static_cast<std::size_t>(s)] = run_start(s, ds, config, warm);
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }

    // Candidate acceptance replayed in (start, iteration) order, so the
    // winner does not depend on worker scheduling.
    TrainReport report;
    ObliqueTree best_tree;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_start = -1;
    bool have_best = false;

    if (warm != nullptr) {
        ObliqueTree seeded = *warm;
        refit_leaves(seeded, ds);
        double loss = hard_loss(seeded, ds.features, ds.targets);
        report.warm_seeded = true;
        report.warm_loss = loss;
        best_tree = std::move(seeded);
        best_loss = loss;
        have_best = true;
        report.best_loss_trajectory.push_back(loss);
    }

    std::string first_error;
    int failures = 0;
    for (auto& oc : outcomes) {
        report.epochs_executed += oc.epochs;
        if (oc.record.failed) {
            ++failures;
            if (first_error.empty()) first_error = oc.record.error;
        }
        // Trajectory gets every candidate test; the winning tree only needs
        // each start's own best (its earliest strict minimum), which the
        // running minimum passes through exactly when that start wins.
        double running = best_loss;
        for (const AlphaIterRecord& ir : oc.record.iters) {
            if (ir.candidate_hard_loss < running) running = ir.candidate_hard_loss;
            report.best_loss_trajectory.push_back(running);
        }
        if (oc.best_iter >= 0 && oc.best_loss < best_loss) {
            best_loss = oc.best_loss;
            best_tree = oc.best_tree;
            best_start = oc.record.start_index;
            have_best = true;
        }
        report.starts.push_back(std::move(oc.record));
    }
    if (failures == config.n_start && !report.warm_seeded)
        throw Error::internal("train: every start failed; first error: " + first_error);
    if (!have_best) throw Error::internal("train: no candidate produced");

    report.best_hard_loss = best_loss;
    report.best_start = best_start;
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return FitResult{std::move(best_tree), std::move(report)};
}

} // namespace obtree
