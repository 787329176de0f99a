#include "obtree/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "obtree/error.hpp"
#include "obtree/stats.hpp"

namespace obtree {

Score r2_score(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
    if (y_true.size() != y_pred.size()) throw Error::user("r2: length mismatch");
    if (y_true.size() < 2) throw Error::user("r2: need at least 2 points");
    double mean = 0.0;
    for (double y : y_true) mean += y;
    mean /= static_cast<double>(y_true.size());
    double sse = 0.0, tss = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        double r = y_true[i] - y_pred[i];
        sse += r * r;
        double d = y_true[i] - mean;
        tss += d * d;
    }
    if (tss == 0.0) throw Error::user("r2: undefined for constant y_true");
    return Score{1.0 - sse / tss, sse, y_true.size()};
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error::user("ttest: length mismatch");
    std::size_t n = a.size();
    if (n < 2) throw Error::user("ttest: need at least 2 pairs");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = (a[i] - b[i]) - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);

    TTestResult res;
    res.dof = static_cast<long>(n - 1);
    double se = std::sqrt(var / static_cast<double>(n));
    if (se == 0.0) {
        if (mean == 0.0) { // all differences zero: documented convention
            res.t_statistic = 0.0;
            res.p_value = 1.0;
            res.ci_low = res.ci_high = 0.0;
            return res;
        }
        // Zero variance, nonzero mean: degenerate; report certainty.
        res.t_statistic = mean > 0.0 ? 1e308 : -1e308;
        res.p_value = 0.0;
        res.ci_low = res.ci_high = mean;
        return res;
    }
    res.t_statistic = mean / se;
    double cdf = students_t_cdf(std::abs(res.t_statistic), static_cast<double>(res.dof));
    res.p_value = 2.0 * (1.0 - cdf);
    res.p_value = std::clamp(res.p_value, 0.0, 1.0);
    double tcrit = students_t_quantile(0.975, static_cast<double>(res.dof));
    res.ci_low = mean - tcrit * se;
    res.ci_high = mean + tcrit * se;
    return res;
}

std::vector<double> friedman_rank(const Matrix& score_table) {
    std::size_t datasets = score_table.rows();
    std::size_t models = score_table.cols();
    if (datasets == 0 || models == 0) throw Error::user("friedman: empty table");
    std::vector<double> mean_ranks(models, 0.0);
    std::vector<double> row(models);
    for (std::size_t d = 0; d < datasets; ++d) {
        for (std::size_t m = 0; m < models; ++m) row[m] = score_table(d, m);
        std::vector<double> ranks = rank_descending(row);
        for (std::size_t m = 0; m < models; ++m) mean_ranks[m] += ranks[m];
    }
    for (double& r : mean_ranks) r /= static_cast<double>(datasets);
    return mean_ranks;
}

double measure_seconds(const std::function<void()>& op, int repetitions) {
    if (repetitions < 1) throw Error::user("timing: repetitions must be >= 1");
    op(); // warm-up excluded from the mean
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repetitions; ++r) op();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(repetitions);
}

double measure_prediction_time(const ObliqueTree& model, const Matrix& X, int repetitions) {
    return measure_seconds([&] { (void)predict(model, X); }, repetitions);
}

double measure_prediction_time(const AxisTree& model, const Matrix& X, int repetitions) {
    return measure_seconds([&] { (void)predict_baseline(model, X); }, repetitions);
}

double measure_prediction_time(const Forest& model, const Matrix& X, int repetitions) {
    return measure_seconds([&] { (void)predict_baseline(model, X); }, repetitions);
}

std::string model_kind_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::get: return "get";
    case ModelKind::get_linear: return "get-linear";
    case ModelKind::cart: return "cart";
    case ModelKind::random_forest: return "rf";
    }
    return "?";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "get") return ModelKind::get;
    if (name == "get-linear" || name == "get_linear") return ModelKind::get_linear;
    if (name == "cart") return ModelKind::cart;
    if (name == "rf" || name == "random-forest" || name == "random_forest")
        return ModelKind::random_forest;
    throw Error::user("unknown model kind \"" + name + "\"");
}

std::vector<double> predict_any(const AnyModel& model, const Matrix& X) {
    if (const auto* t = std::get_if<ObliqueTree>(&model)) return predict(*t, X);
    if (const auto* t = std::get_if<AxisTree>(&model)) return predict_baseline(*t, X);
    return predict_baseline(std::get<Forest>(model), X);
}

std::size_t count_parameters_any(const AnyModel& model) {
    if (const auto* t = std::get_if<ObliqueTree>(&model)) return count_parameters(*t).total;
    if (const auto* t = std::get_if<AxisTree>(&model)) return count_parameters(*t);
    return count_parameters(std::get<Forest>(model));
}

namespace {

struct FittedModel {
    AnyModel model;
    NormalizationTransform norm;
};

// Trains `kind` at one depth on the given raw rows, normalizing with
// those rows' own statistics.
FittedModel fit_at_depth(const RawData& raw, const std::vector<std::size_t>& rows, ModelKind kind,
                         int depth, int trees, const TuneConfig& cfg, std::uint64_t seed) {
    RawData raw_fit = subset(raw, rows);
    Dataset ds = normalize(raw_fit);
    FittedModel out;
    out.norm = ds.norm;
    switch (kind) {
    case ModelKind::get:
    case ModelKind::get_linear: {
        TrainConfig tc = cfg.train;
        tc.depth = depth;
        tc.leaf_mode = kind == ModelKind::get ? LeafMode::constant : LeafMode::linear;
        tc.seed = seed;
        FitResult fr = fit(ds, tc);
        if (cfg.polish) polish(fr.tree, ds, tc, cfg.polish_cfg);
        out.model = std::move(fr.tree);
        break;
    }
    case ModelKind::cart:
        out.model = fit_cart(ds, depth);
        break;
    case ModelKind::random_forest:
        out.model = fit_forest(ds, trees, depth, cfg.forest_m, seed, 2, true, cfg.train.threads);
        break;
    }
    return out;
}

// Denormalized predictions of a fitted model on raw feature rows.
std::vector<double> predict_raw(const FittedModel& fm, const RawData& raw,
                                const std::vector<std::size_t>& rows) {
    RawData r = subset(raw, rows);
    Dataset ds = apply_transform(r, fm.norm);
    std::vector<double> pred = predict_any(fm.model, ds.features);
    for (double& v : pred) v = denormalize_target(v, fm.norm);
    return pred;
}

std::vector<double> gather(const std::vector<double>& y, const std::vector<std::size_t>& rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
    return out;
}

} // namespace

TuneResult tune_depth(const RawData& data, ModelKind kind, const std::vector<int>& depth_grid,
                      const TuneConfig& cfg) {
    if (depth_grid.empty()) throw Error::user("tune: empty depth grid");
    std::size_t n = data.features.rows();
    if (cfg.split.mode == SplitMode::holdout_75_25)
        throw Error::user("tune: the 75/25 split provides no validation partition");
    Partitions parts = split_indices(n, cfg.split);

    // Fold pairs of (fit rows, score rows); holdout gives one pair.
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds;
    std::vector<std::size_t> retrain_rows;
    if (cfg.split.mode == SplitMode::holdout_50_25_25) {
        folds.emplace_back(parts.train, parts.val);
        retrain_rows = parts.train;
        retrain_rows.insert(retrain_rows.end(), parts.val.begin(), parts.val.end());
    } else {
        for (std::size_t f = 0; f < parts.folds.size(); ++f) {
            std::vector<std::size_t> fit_rows;
            for (std::size_t g = 0; g < parts.folds.size(); ++g)
                if (g != f) fit_rows.insert(fit_rows.end(), parts.folds[g].begin(),
                                            parts.folds[g].end());
            folds.emplace_back(std::move(fit_rows), parts.folds[f]);
            retrain_rows.insert(retrain_rows.end(), parts.folds[f].begin(), parts.folds[f].end());
        }
    }

    TuneResult result;
    result.parts = parts;
    int best_depth = 0;
    double best_r2 = -std::numeric_limits<double>::infinity();
    bool any_ok = false;
    std::string first_error;

    for (int depth : depth_grid) {
        DepthScore dsc;
        dsc.depth = depth;
        try {
            double acc = 0.0;
            for (auto& [fit_rows, score_rows] : folds) {
                FittedModel fm =
                    fit_at_depth(data, fit_rows, kind, depth, cfg.forest_trees, cfg,
                                 derive_seed(cfg.train.seed, static_cast<std::uint64_t>(depth)));
                std::vector<double> pred = predict_raw(fm, data, score_rows);
                acc += r2_score(gather(data.targets, score_rows), pred).r2;
            }
            dsc.val_r2 = acc / static_cast<double>(folds.size());
            any_ok = true;
            if (dsc.val_r2 > best_r2) { // strict: ties go to the smaller depth
                best_r2 = dsc.val_r2;
                best_depth = depth;
            }
        } catch (const std::exception& e) {
            dsc.failed = true;
            dsc.error = e.what();
            if (first_error.empty()) first_error = e.what();
        }
        result.depth_scores.push_back(std::move(dsc));
    }
    if (!any_ok) throw Error::user("tune: every depth failed; first error: " + first_error);

    result.best_depth = best_depth;
    FittedModel retrained =
        fit_at_depth(data, retrain_rows, kind, best_depth, cfg.forest_trees, cfg,
                     derive_seed(cfg.train.seed, 0x5eedull));
    result.model = std::move(retrained.model);
    result.norm = retrained.norm;
    return result;
}

BenchReport run_bench(const std::vector<RawData>& datasets, const std::vector<std::string>& names,
                      const BenchConfig& cfg) {
    if (datasets.empty()) throw Error::user("bench: no datasets");
    if (datasets.size() != names.size()) throw Error::internal("bench: name/dataset mismatch");
    if (cfg.models.empty()) throw Error::user("bench: no models requested");

    BenchReport report;
    report.dataset_names = names;
    report.models = cfg.models;
    report.cells.resize(datasets.size());

    for (std::size_t d = 0; d < datasets.size(); ++d) {
        const RawData& raw = datasets[d];
        for (ModelKind kind : cfg.models) {
            BenchCell cell;
            cell.model = kind;
            try {
                TuneConfig tc = cfg.tune;
                if (kind == ModelKind::get_linear) tc.polish = cfg.polish_linear;
                if (kind == ModelKind::cart || kind == ModelKind::random_forest)
                    tc.polish = false;

                const std::vector<int>& grid =
                    kind == ModelKind::random_forest && !cfg.rf_depth_grid.empty()
                        ? cfg.rf_depth_grid
                        : cfg.depth_grid;

                auto t0 = std::chrono::steady_clock::now();
                TuneResult tuned;
                if (kind == ModelKind::random_forest && cfg.rf_trees_grid.size() > 1) {
                    // Grid over tree counts, keeping the best validation R^2.
                    bool have = false;
                    double best = -std::numeric_limits<double>::infinity();
                    for (int trees : cfg.rf_trees_grid) {
                        TuneConfig tt = tc;
                        tt.forest_trees = trees;
                        TuneResult r = tune_depth(raw, kind, grid, tt);
                        double val = -std::numeric_limits<double>::infinity();
                        for (const auto& s : r.depth_scores)
                            if (!s.failed && s.depth == r.best_depth) val = s.val_r2;
                        if (!have || val > best) {
                            best = val;
                            tuned = std::move(r);
                            cell.trees = trees;
                            have = true;
                        }
                    }
                } else {
                    if (kind == ModelKind::random_forest && !cfg.rf_trees_grid.empty()) {
                        tc.forest_trees = cfg.rf_trees_grid.front();
                        cell.trees = tc.forest_trees;
                    } else if (kind == ModelKind::random_forest) {
                        cell.trees = tc.forest_trees;
                    }
                    tuned = tune_depth(raw, kind, grid, tc);
                }
                cell.train_seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

                cell.depth = tuned.best_depth;
                cell.parameter_count = count_parameters_any(tuned.model);

                RawData raw_test = subset(raw, tuned.parts.test);
                Dataset test_ds = apply_transform(raw_test, tuned.norm);
                std::vector<double> pred = predict_any(tuned.model, test_ds.features);
                for (double& v : pred) v = denormalize_target(v, tuned.norm);
                cell.test_r2 = r2_score(raw_test.targets, pred).r2;
                cell.predict_seconds = measure_seconds(
                    [&] { (void)predict_any(tuned.model, test_ds.features); },
                    cfg.time_repetitions);
            } catch (const std::exception& e) {
                cell.failed = true;
                cell.error = e.what();
            }
            report.cells[d].push_back(std::move(cell));
        }
    }

    // Aggregates over datasets where every model succeeded (rank rows must
    // be complete).
    std::size_t m = cfg.models.size();
    report.mean_r2.assign(m, 0.0);
    std::vector<std::size_t> ok_counts(m, 0);
    std::vector<std::size_t> complete_rows;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        bool complete = true;
        for (std::size_t k = 0; k < m; ++k) {
            if (report.cells[d][k].failed) {
                complete = false;
            } else {
                report.mean_r2[k] += report.cells[d][k].test_r2;
                ok_counts[k] += 1;
            }
        }
        if (complete) complete_rows.push_back(d);
    }
    for (std::size_t k = 0; k < m; ++k)
        report.mean_r2[k] = ok_counts[k] ? report.mean_r2[k] / static_cast<double>(ok_counts[k])
                                         : std::numeric_limits<double>::quiet_NaN();

    if (!complete_rows.empty()) {
        Matrix table(complete_rows.size(), m);
        for (std::size_t r = 0; r < complete_rows.size(); ++r)
            for (std::size_t k = 0; k < m; ++k)
                table(r, k) = report.cells[complete_rows[r]][k].test_r2;
        report.friedman = friedman_rank(table);
        if (complete_rows.size() >= 2) {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = i + 1; j < m; ++j) {
                    std::vector<double> a(complete_rows.size()), b(complete_rows.size());
                    for (std::size_t r = 0; r < complete_rows.size(); ++r) {
                        a[r] = table(r, i);
                        b[r] = table(r, j);
                    }
                    report.ttests.push_back(
                        PairwiseTTest{cfg.models[i], cfg.models[j], paired_ttest(a, b)});
                }
        }
    }
    return report;
}

std::string format_bench_table(const BenchReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(20) << "dataset" << std::setw(12) << "model" << std::right
       << std::setw(7) << "trees" << std::setw(7) << "depth" << std::setw(10) << "params"
       << std::setw(11) << "test R2" << std::setw(12) << "train s" << std::setw(14)
       << "predict us" << '\n';
    for (std::size_t d = 0; d < report.dataset_names.size(); ++d) {
        for (std::size_t k = 0; k < report.models.size(); ++k) {
            const BenchCell& c = report.cells[d][k];
            os << std::left << std::setw(20) << report.dataset_names[d] << std::setw(12)
               << model_kind_name(c.model) << std::right;
            if (c.failed) {
                os << "  failed: " << c.error << '\n';
                continue;
            }
            os << std::setw(7) << c.trees << std::setw(7) << c.depth << std::setw(10)
               << c.parameter_count << std::setw(11) << std::fixed << std::setprecision(4)
               << c.test_r2 << std::setw(12) << std::setprecision(3) << c.train_seconds
               << std::setw(14) << std::setprecision(1) << c.predict_seconds * 1e6 << '\n';
            os.unsetf(std::ios::fixed);
        }
    }
    if (!report.friedman.empty()) {
        os << '\n'
           << std::left << std::setw(12) << "model" << std::right << std::setw(11) << "mean R2"
           << std::setw(10) << "rank" << '\n';
        for (std::size_t k = 0; k < report.models.size(); ++k) {
            os << std::left << std::setw(12) << model_kind_name(report.models[k]) << std::right
               << std::setw(11) << std::fixed << std::setprecision(4) << report.mean_r2[k]
               << std::setw(10) << std::setprecision(2) << report.friedman[k] << '\n';
            os.unsetf(std::ios::fixed);
        }
    }
    return os.str();
}

} // namespace obtree
