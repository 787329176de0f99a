#ifndef OBTREE_EVALUATE_HPP
#define OBTREE_EVALUATE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "obtree/baselines.hpp"
#include "obtree/dataset.hpp"
#include "obtree/polish.hpp"
#include "obtree/train.hpp"
#include "obtree/tree.hpp"

namespace obtree {

struct Score {
    double r2 = 0.0;
    double sse = 0.0;
    std::size_t n_eval = 0;
};

/// Coefficient of determination, 1 - SSE / sum (y - mean(y))^2 with the
/// evaluation-set mean. Errors (Error::user) on length mismatch, fewer
/// than 2 points, or constant y_true.
Score r2_score(const std::vector<double>& y_true, const std::vector<double>& y_pred);

struct TTestResult {
    double t_statistic = 0.0;
    double p_value = 1.0;
    long dof = 0;
    double ci_low = 0.0; // 95% CI on the mean difference
    double ci_high = 0.0;
};

/// Two-sided paired Student's t on a - b. All-zero differences give
/// t = 0, p = 1; zero variance with nonzero mean gives p = 0 and t
/// clamped to +-1e308. Errors (Error::user) on mismatch or n < 2.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Mean rank per model over a datasets x models score table (higher
/// score is better, rank 1 best, ties share mean rank). Errors
/// (Error::user) on an empty table.
std::vector<double> friedman_rank(const Matrix& score_table);

/// Mean wall seconds of op over `repetitions` runs after one warm-up.
double measure_seconds(const std::function<void()>& op, int repetitions);

double measure_prediction_time(const ObliqueTree& model, const Matrix& X, int repetitions);
double measure_prediction_time(const AxisTree& model, const Matrix& X, int repetitions);
double measure_prediction_time(const Forest& model, const Matrix& X, int repetitions);

enum class ModelKind : std::uint8_t { get, get_linear, cart, random_forest };

std::string model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name); // Error::user on unknown

using AnyModel = std::variant<ObliqueTree, AxisTree, Forest>;

std::vector<double> predict_any(const AnyModel& model, const Matrix& X);
std::size_t count_parameters_any(const AnyModel& model);

struct TuneConfig {
    TrainConfig train;          // depth is overridden by the grid
    bool polish = false;        // applied to oblique fits at every depth and the retrain
    PolishConfig polish_cfg;
    int forest_trees = 100;     // fixed tree count while tuning forest depth
    std::size_t forest_m = 0;   // 0 = default p/3
    SplitSpec split;            // must provide a validation partition
};

struct DepthScore {
    int depth = 0;
    double val_r2 = 0.0;
    bool failed = false;
    std::string error;
};

struct TuneResult {
    int best_depth = 0;
    std::vector<DepthScore> depth_scores;
    AnyModel model;                // retrained on train + validation rows
    NormalizationTransform norm;   // transform of the retrain fit
    Partitions parts;              // row partition used (test untouched here)
};

/// Depth tuning on raw (unnormalized) data: splits rows per cfg.split
/// (holdout_50_25_25 or kfold; holdout text errors for lack of a
/// validation part), normalizes with the statistics of each fit's own
/// training rows, trains the model kind at every grid depth, scores
/// validation R^2 on the original scale, picks the best depth (ties to
/// the smaller), and retrains on the combined training + validation rows.
/// Depths whose training fails are recorded and skipped; errors only when
/// every depth fails.
TuneResult tune_depth(const RawData& data, ModelKind kind, const std::vector<int>& depth_grid,
                      const TuneConfig& cfg);

struct BenchConfig {
    std::vector<ModelKind> models;
    std::vector<int> depth_grid;     // oblique + cart tuning grid
    std::vector<int> rf_depth_grid;  // forest grid (broader)
    std::vector<int> rf_trees_grid;  // forest size grid
    TuneConfig tune;                 // budgets, seed, split, polish policy
    int time_repetitions = 100;
    bool polish_linear = false;      // polish applies to get_linear only if set
};

struct BenchCell {
    ModelKind model = ModelKind::get;
    double test_r2 = 0.0;
    int depth = 0;
    int trees = 1;                   // 1 except for forests
    std::size_t parameter_count = 0;
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
    bool failed = false;
    std::string error;
};

struct PairwiseTTest {
    ModelKind model_a = ModelKind::get;
    ModelKind model_b = ModelKind::get;
    TTestResult result;
};

struct BenchReport {
    std::vector<std::string> dataset_names;
    std::vector<ModelKind> models;
    std::vector<std::vector<BenchCell>> cells; // [dataset][model]
    std::vector<double> mean_r2;               // per model, over non-failed datasets
    std::vector<double> friedman;              // mean ranks (complete tables only)
    std::vector<PairwiseTTest> ttests;         // over per-dataset test R^2
};

/// Tunes and scores every requested model on every dataset: per dataset,
/// rows split once (so all models share train/val/test), each model depth-
/// tuned and retrained, then scored on the held-out test rows with train
/// and prediction wall times. Forests additionally grid over tree counts.
/// Per-model failures are recorded in the cell; the run continues.
BenchReport run_bench(const std::vector<RawData>& datasets,
                      const std::vector<std::string>& names, const BenchConfig& cfg);

/// Column-aligned text table of a report (model, trees, depth, params,
/// test R^2, Friedman rank).
std::string format_bench_table(const BenchReport& report);

} // namespace obtree

#endif // OBTREE_EVALUATE_HPP
