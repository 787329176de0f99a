// obtree: train / predict / tune / bench over the oblique-tree library.
// Progress goes to stderr; machine-readable output goes to files and
// stdout. Exit codes: 0 success, 1 user or data error, 2 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "obtree/csv.hpp"
#include "obtree/error.hpp"
#include "obtree/evaluate.hpp"
#include "obtree/model_io.hpp"
#include "obtree/polish.hpp"
#include "obtree/train.hpp"

using namespace obtree;
using nlohmann::json;

namespace {

int default_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// "5,25" -> {5, 25}
std::pair<double, double> parse_range_pair(const std::string& text, const std::string& flag) {
    auto comma = text.find(',');
    if (comma == std::string::npos)
        throw Error::user(flag + ": expected \"min,max\", got \"" + text + "\"");
    try {
        double lo = std::stod(text.substr(0, comma));
        double hi = std::stod(text.substr(comma + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw Error::user(flag + ": expected \"min,max\", got \"" + text + "\"");
    }
}

// "1:4,6,8" -> {1,2,3,4,6,8}
std::vector<int> parse_depth_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            auto colon = tok.find(':');
            if (colon == std::string::npos) {
                out.push_back(std::stoi(tok));
            } else {
                int lo = std::stoi(tok.substr(0, colon));
                int hi = std::stoi(tok.substr(colon + 1));
                if (hi < lo) throw Error::user(flag + ": empty range \"" + tok + "\"");
                for (int d = lo; d <= hi; ++d) out.push_back(d);
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw Error::user(flag + ": cannot parse \"" + tok + "\"");
        }
    }
    if (out.empty()) throw Error::user(flag + ": no depths given");
    return out;
}

// "75/25" | "50/25/25" | "cv:K"
SplitSpec parse_split(const std::string& text, std::uint64_t seed) {
    SplitSpec spec;
    spec.seed = seed;
    if (text == "75/25") {
        spec.mode = SplitMode::holdout_75_25;
    } else if (text == "50/25/25") {
        spec.mode = SplitMode::holdout_50_25_25;
    } else if (text.rfind("cv:", 0) == 0) {
        spec.mode = SplitMode::kfold;
        try {
            spec.k = std::stoi(text.substr(3));
        } catch (const std::exception&) {
            throw Error::user("--split: cannot parse fold count in \"" + text + "\"");
        }
    } else {
        throw Error::user("--split: expected 75/25, 50/25/25, or cv:<k>, got \"" + text + "\"");
    }
    return spec;
}

std::vector<ModelKind> parse_models(const std::string& text) {
    std::vector<ModelKind> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_model_kind(tok));
    if (out.empty()) throw Error::user("--models: no models given");
    return out;
}

std::string dataset_label(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error::user("cannot write \"" + path + "\"");
    out << text;
    if (!out) throw Error::user("write failed for \"" + path + "\"");
}

// --------------------------------------------------------------- reports

json config_json(const TrainConfig& c) {
    return json{{"depth", c.depth},
                {"leaf", c.leaf_mode == LeafMode::linear ? "linear" : "constant"},
                {"starts", c.n_start},
                {"epochs", c.n_epoch},
                {"alpha_small", {c.alpha_small_min, c.alpha_small_max}},
                {"alpha_large", {c.alpha_large_min, c.alpha_large_max}},
                {"alpha_count", c.alpha_count},
                {"lr", c.eta0},
                {"lr_min", c.eta_min},
                {"lr_period", c.lr_period},
                {"lr_period_mult", c.lr_period_mult},
                {"adaptive", c.adaptive},
                {"lambda", c.lambda},
                {"seed", c.seed},
                {"threads", c.threads}};
}

json train_report_json(const TrainReport& r) {
    json starts = json::array();
    for (const auto& s : r.starts) {
        json iters = json::array();
        for (const auto& it : s.iters)
            iters.push_back({{"alpha", it.alpha},
                             {"soft_loss", it.soft_loss},
                             {"candidate_hard_loss", it.candidate_hard_loss},
                             {"params_in", hex64(it.params_in_fp)},
                             {"params_out", hex64(it.params_out_fp)},
                             {"epochs_run", it.epochs_run},
                             {"aborted_non_finite", it.aborted_non_finite}});
        starts.push_back({{"start", s.start_index},
                          {"alphas", s.alphas},
                          {"iterations", std::move(iters)},
                          {"failed", s.failed},
                          {"error", s.error}});
    }
    return json{{"starts", std::move(starts)},
                {"best_loss_trajectory", r.best_loss_trajectory},
                {"best_hard_loss", r.best_hard_loss},
                {"best_start", r.best_start},
                {"warm_seeded", r.warm_seeded},
                {"warm_loss", r.warm_loss},
                {"epochs_executed", r.epochs_executed},
                {"wall_seconds", r.wall_seconds}};
}

json polish_report_json(const PolishReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back({{"node", e.node},
                           {"subset_size", e.subset_size},
                           {"skipped", e.skipped},
                           {"skip_reason", e.skip_reason},
                           {"pre_loss", e.pre_loss},
                           {"post_loss", e.post_loss},
                           {"accepted", e.accepted}});
    return json{{"entries", std::move(entries)},
                {"initial_loss", r.initial_loss},
                {"final_loss", r.final_loss}};
}

json bench_report_json(const BenchReport& r) {
    json cells = json::array();
    for (std::size_t d = 0; d < r.cells.size(); ++d) {
        json row = json::array();
        for (const auto& c : r.cells[d])
            row.push_back({{"model", model_kind_name(c.model)},
                           {"test_r2", c.test_r2},
                           {"depth", c.depth},
                           {"trees", c.trees},
                           {"parameter_count", c.parameter_count},
                           {"train_seconds", c.train_seconds},
                           {"predict_seconds", c.predict_seconds},
                           {"failed", c.failed},
                           {"error", c.error}});
        cells.push_back(std::move(row));
    }
    json models = json::array();
    for (ModelKind m : r.models) models.push_back(model_kind_name(m));
    json ttests = json::array();
    for (const auto& t : r.ttests)
        ttests.push_back({{"model_a", model_kind_name(t.model_a)},
                          {"model_b", model_kind_name(t.model_b)},
                          {"t", t.result.t_statistic},
                          {"p", t.result.p_value},
                          {"dof", t.result.dof},
                          {"ci", {t.result.ci_low, t.result.ci_high}}});
    return json{{"datasets", r.dataset_names}, {"models", std::move(models)},
                {"cells", std::move(cells)},  {"mean_r2", r.mean_r2},
                {"friedman", r.friedman},     {"ttests", std::move(ttests)}};
}

// ------------------------------------------------------------- commands

struct DataFlags {
    std::string path;
    std::string target = "y";
    bool header = true;
};

struct TrainFlags {
    DataFlags data;
    TrainConfig cfg;
    std::string alpha_small = "5,25";
    std::string alpha_large = "50,150";
    std::string leaf = "constant";
    bool plain_step = false;
    std::optional<bool> polish; // unset = on for constant leaves, off for linear
    std::string out;
    std::string report;
};

void apply_train_flags(TrainFlags& f) {
    if (f.leaf == "constant") {
        f.cfg.leaf_mode = LeafMode::constant;
    } else if (f.leaf == "linear") {
        f.cfg.leaf_mode = LeafMode::linear;
    } else {
        throw Error::user("--leaf: expected constant or linear, got \"" + f.leaf + "\"");
    }
    std::tie(f.cfg.alpha_small_min, f.cfg.alpha_small_max) =
        parse_range_pair(f.alpha_small, "--alpha-small");
    std::tie(f.cfg.alpha_large_min, f.cfg.alpha_large_max) =
        parse_range_pair(f.alpha_large, "--alpha-large");
    f.cfg.adaptive = !f.plain_step;
}

void add_train_options(CLI::App* cmd, TrainFlags& f) {
    cmd->add_option("--depth", f.cfg.depth, "Tree depth")->capture_default_str();
    cmd->add_option("--leaf", f.leaf, "Leaf model: constant or linear")->capture_default_str();
    cmd->add_option("--starts", f.cfg.n_start, "Random restarts")->capture_default_str();
    cmd->add_option("--epochs", f.cfg.n_epoch, "Descent epochs per scale factor")
        ->capture_default_str();
    cmd->add_option("--alpha-small", f.alpha_small, "First scale-factor range, min,max")
        ->capture_default_str();
    cmd->add_option("--alpha-large", f.alpha_large, "Second scale-factor range, min,max")
        ->capture_default_str();
    cmd->add_option("--alpha-count", f.cfg.alpha_count, "Scale factors per start")
        ->capture_default_str();
    cmd->add_option("--lr", f.cfg.eta0, "Peak learning rate")->capture_default_str();
    cmd->add_option("--lr-min", f.cfg.eta_min, "Learning-rate floor")->capture_default_str();
    cmd->add_option("--lr-period", f.cfg.lr_period, "Epochs per cosine restart cycle")
        ->capture_default_str();
    cmd->add_option("--lr-period-mult", f.cfg.lr_period_mult, "Cycle length growth factor")
        ->capture_default_str();
    cmd->add_flag("--plain-step", f.plain_step,
                  "Plain gradient steps instead of adaptive moment estimates");
    cmd->add_option("--lambda", f.cfg.lambda, "L1 strength on split weights")
        ->capture_default_str();
    cmd->add_option("--seed", f.cfg.seed, "Root seed for every random draw")
        ->capture_default_str();
    cmd->add_option("--threads", f.cfg.threads, "Worker threads (1 = bitwise deterministic)")
        ->capture_default_str();
}

void add_data_options(CLI::App* cmd, DataFlags& d, bool require_target_default) {
    cmd->add_option("--data", d.path, "CSV file")->required();
    auto* tgt = cmd->add_option("--target", d.target, "Target column name or 0-based index");
    if (require_target_default) tgt->capture_default_str();
    cmd->add_flag("--header,!--no-header", d.header, "First row is a header (default on)");
}

int cmd_train(TrainFlags& f) {
    apply_train_flags(f);
    RawData raw = load_csv(f.data.path, f.data.target, f.data.header);
    Dataset ds = normalize(raw);
    std::fprintf(stderr, "training: %zu rows, %zu features, depth %d, %s leaves, %d starts x %d "
                         "epochs, %d threads\n",
                 ds.size(), ds.num_features(), f.cfg.depth,
                 f.cfg.leaf_mode == LeafMode::linear ? "linear" : "constant", f.cfg.n_start,
                 f.cfg.n_epoch, f.cfg.threads);

    FitResult fit_result = fit(ds, f.cfg);
    bool run_polish = f.polish.value_or(f.cfg.leaf_mode == LeafMode::constant);
    std::optional<PolishReport> polish_report;
    if (run_polish) {
        std::fprintf(stderr, "polishing %zu branch nodes\n", fit_result.tree.branch_count());
        polish_report = polish(fit_result.tree, ds, f.cfg);
    }

    double final_loss =
        polish_report ? polish_report->final_loss : fit_result.report.best_hard_loss;
    json r2 = nullptr; // stays null when R2 is undefined (constant targets)
    try {
        r2 = r2_score(ds.targets, predict(fit_result.tree, ds.features)).r2;
    } catch (const Error&) {
    }

    write_text_file(f.out, serialize(fit_result.tree, ds.norm));

    json report{{"command", "train"},
                {"data", f.data.path},
                {"target", f.data.target},
                {"header", f.data.header},
                {"out", f.out},
                {"polish", run_polish},
                {"config", config_json(f.cfg)},
                {"train", train_report_json(fit_result.report)},
                {"train_r2", r2},
                {"final_hard_loss", final_loss}};
    if (polish_report) report["polish_pass"] = polish_report_json(*polish_report);
    if (!f.report.empty()) write_text_file(f.report, report.dump(2) + "\n");

    std::fprintf(stderr, "done: hard loss %.6g, train R2 %s%s\n", final_loss,
                 r2.is_null() ? "n/a" : r2.dump().c_str(), run_polish ? " (polished)" : "");
    std::printf("%s\n", json{{"model", f.out},
                             {"train_r2", r2},
                             {"final_hard_loss", final_loss},
                             {"wall_seconds", fit_result.report.wall_seconds}}
                            .dump()
                            .c_str());
    return 0;
}

struct PredictFlags {
    std::string model;
    std::string data;
    std::string target; // optional; enables scoring
    bool header = true;
    std::string out;
};

int cmd_predict(PredictFlags& f) {
    LoadedModel model = load_model_file(f.model);
    RawData raw;
    if (!f.target.empty()) {
        raw = load_csv(f.data, f.target, f.header);
    } else {
        raw = load_feature_csv(f.data, f.header);
    }
    Dataset ds = apply_transform(raw, model.norm);

    std::vector<double> pred;
    if (model.model_kind == "oblique_tree") {
        pred = predict(model.oblique, ds.features);
    } else if (model.model_kind == "cart") {
        pred = predict_baseline(model.axis, ds.features);
    } else {
        pred = predict_baseline(model.forest, ds.features);
    }
    for (auto& v : pred) v = denormalize_target(v, model.norm);

    std::ostringstream lines;
    lines.precision(17);
    for (double v : pred) lines << v << '\n';
    if (f.out.empty()) {
        std::fputs(lines.str().c_str(), stdout);
    } else {
        write_text_file(f.out, lines.str());
    }

    bool scored = false;
    if (!f.target.empty() && raw.targets.size() >= 2) {
        try {
            Score s = r2_score(raw.targets, pred);
            std::fprintf(stderr, "scored %zu rows: R2 %.4f, SSE %.6g\n", s.n_eval, s.r2, s.sse);
            scored = true;
        } catch (const Error&) { // constant targets: R2 undefined
        }
    }
    if (!scored) std::fprintf(stderr, "predicted %zu rows\n", pred.size());
    return 0;
}

struct TuneFlags {
    DataFlags data;
    TrainFlags train; // budgets shared with cmd_train; depth comes from the grid
    std::string model = "get";
    std::string depths = "1:12";
    std::string split = "50/25/25";
    int forest_trees = 100;
    std::size_t forest_m = 0;
    std::string out;
    std::string report;
};

json depth_scores_json(const std::vector<DepthScore>& scores) {
    json out = json::array();
    for (const auto& d : scores)
        out.push_back(
            {{"depth", d.depth}, {"val_r2", d.val_r2}, {"failed", d.failed}, {"error", d.error}});
    return out;
}

std::string serialize_any(const AnyModel& model, const NormalizationTransform& norm) {
    if (const auto* t = std::get_if<ObliqueTree>(&model)) return serialize(*t, norm);
    if (const auto* t = std::get_if<AxisTree>(&model)) return serialize(*t, norm);
    return serialize(std::get<Forest>(model), norm);
}

int cmd_tune(TuneFlags& f) {
    apply_train_flags(f.train);
    ModelKind kind = parse_model_kind(f.model);
    std::vector<int> grid = parse_depth_list(f.depths, "--depths");

    TuneConfig cfg;
    cfg.train = f.train.cfg;
    bool oblique = kind == ModelKind::get || kind == ModelKind::get_linear;
    cfg.polish = oblique && f.train.polish.value_or(kind == ModelKind::get);
    cfg.forest_trees = f.forest_trees;
    cfg.forest_m = f.forest_m;
    cfg.split = parse_split(f.split, f.train.cfg.seed);

    RawData raw = load_csv(f.data.path, f.data.target, f.data.header);
    std::fprintf(stderr, "tuning %s over %zu depths on %zu rows\n", model_kind_name(kind).c_str(),
                 grid.size(), raw.targets.size());
    TuneResult tuned = tune_depth(raw, kind, grid, cfg);

    std::optional<double> test_r2;
    if (!tuned.parts.test.empty()) {
        RawData test_raw = subset(raw, tuned.parts.test);
        Dataset test_ds = apply_transform(test_raw, tuned.norm);
        std::vector<double> pred = predict_any(tuned.model, test_ds.features);
        for (auto& v : pred) v = denormalize_target(v, tuned.norm);
        test_r2 = r2_score(test_raw.targets, pred).r2;
    }

    if (!f.out.empty()) write_text_file(f.out, serialize_any(tuned.model, tuned.norm));

    json report{{"command", "tune"},
                {"data", f.data.path},
                {"target", f.data.target},
                {"model", model_kind_name(kind)},
                {"depths", grid},
                {"split", f.split},
                {"polish", cfg.polish},
                {"forest_trees", f.forest_trees},
                {"forest_m", f.forest_m},
                {"config", config_json(cfg.train)},
                {"best_depth", tuned.best_depth},
                {"depth_scores", depth_scores_json(tuned.depth_scores)}};
    if (test_r2) report["test_r2"] = *test_r2;
    if (!f.out.empty()) report["out"] = f.out;
    if (!f.report.empty()) write_text_file(f.report, report.dump(2) + "\n");

    json summary{{"model", model_kind_name(kind)}, {"best_depth", tuned.best_depth}};
    if (test_r2) summary["test_r2"] = *test_r2;
    std::printf("%s\n", summary.dump().c_str());
    return 0;
}

struct BenchFlags {
    std::vector<std::string> data;
    std::string target = "y";
    bool header = true;
    TrainFlags train;
    std::string models = "get,get-linear,cart,rf";
    std::string depths = "1:12";
    std::string rf_depths = "2,4,6,8,10,12,14,16,18,20";
    std::string rf_trees = "50,100,200,300,400,500";
    std::string split = "50/25/25";
    int time_reps = 100;
    bool polish_linear = false;
    std::string report;
};

int cmd_bench(BenchFlags& f) {
    apply_train_flags(f.train);
    BenchConfig cfg;
    cfg.models = parse_models(f.models);
    cfg.depth_grid = parse_depth_list(f.depths, "--depths");
    cfg.rf_depth_grid = parse_depth_list(f.rf_depths, "--rf-depths");
    cfg.rf_trees_grid = parse_depth_list(f.rf_trees, "--rf-trees");
    cfg.tune.train = f.train.cfg;
    cfg.tune.polish = f.train.polish.value_or(true);
    cfg.tune.split = parse_split(f.split, f.train.cfg.seed);
    cfg.time_repetitions = f.time_reps;
    cfg.polish_linear = f.polish_linear;

    std::vector<RawData> datasets;
    std::vector<std::string> names;
    for (const std::string& path : f.data) {
        datasets.push_back(load_csv(path, f.target, f.header));
        names.push_back(dataset_label(path));
        std::fprintf(stderr, "loaded %s: %zu rows\n", names.back().c_str(),
                     datasets.back().targets.size());
    }

    BenchReport rep = run_bench(datasets, names, cfg);

    if (!f.report.empty()) {
        json report{{"command", "bench"},
                    {"datasets", f.data},
                    {"target", f.target},
                    {"models", f.models},
                    {"depths", f.depths},
                    {"rf_depths", f.rf_depths},
                    {"rf_trees", f.rf_trees},
                    {"split", f.split},
                    {"time_repetitions", f.time_reps},
                    {"config", config_json(cfg.tune.train)},
                    {"report", bench_report_json(rep)}};
        write_text_file(f.report, report.dump(2) + "\n");
    }
    std::fputs(format_bench_table(rep).c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hard-split oblique regression trees trained by whole-tree gradient descent, "
                 "with axis-aligned and forest baselines"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    train_flags.cfg.threads = default_threads();
    auto* train_cmd = app.add_subcommand("train", "Fit one tree and write a model file");
    add_data_options(train_cmd, train_flags.data, true);
    add_train_options(train_cmd, train_flags);
    bool flag_polish = false, flag_no_polish = false;
    train_cmd->add_flag("--polish", flag_polish, "Re-optimize each subtree after training");
    train_cmd->add_flag("--no-polish", flag_no_polish, "Skip the subtree pass");
    train_cmd->add_option("--out", train_flags.out, "Model JSON path")->required();
    train_cmd->add_option("--report", train_flags.report, "Training report JSON path");

    PredictFlags predict_flags;
    auto* predict_cmd = app.add_subcommand("predict", "Apply a model file to rows of a CSV");
    predict_cmd->add_option("--model", predict_flags.model, "Model JSON path")->required();
    predict_cmd->add_option("--data", predict_flags.data, "CSV file")->required();
    predict_cmd->add_option("--target", predict_flags.target,
                            "Target column, scored against predictions when given");
    predict_cmd->add_flag("--header,!--no-header", predict_flags.header,
                          "First row is a header (default on)");
    predict_cmd->add_option("--out", predict_flags.out,
                            "Predictions path, one per row (default stdout)");

    TuneFlags tune_flags;
    tune_flags.train.cfg.threads = default_threads();
    auto* tune_cmd = app.add_subcommand("tune", "Pick a depth on validation data and retrain");
    add_data_options(tune_cmd, tune_flags.data, true);
    add_train_options(tune_cmd, tune_flags.train);
    tune_cmd->add_option("--model", tune_flags.model, "get, get-linear, cart, or rf")
        ->capture_default_str();
    tune_cmd->add_option("--depths", tune_flags.depths, "Grid, e.g. 1:8 or 2,4,6")
        ->capture_default_str();
    tune_cmd->add_option("--split", tune_flags.split, "50/25/25 or cv:<k>")
        ->capture_default_str();
    tune_cmd->add_option("--forest-trees", tune_flags.forest_trees, "Trees while tuning rf")
        ->capture_default_str();
    tune_cmd->add_option("--forest-m", tune_flags.forest_m,
                         "Features per split for rf (0 = p/3)");
    bool tune_polish = false, tune_no_polish = false;
    tune_cmd->add_flag("--polish", tune_polish, "Polish oblique fits at every depth");
    tune_cmd->add_flag("--no-polish", tune_no_polish, "Skip the subtree pass");
    tune_cmd->add_option("--out", tune_flags.out, "Retrained model JSON path");
    tune_cmd->add_option("--report", tune_flags.report, "Tuning report JSON path");

    BenchFlags bench_flags;
    bench_flags.train.cfg.threads = default_threads();
    auto* bench_cmd = app.add_subcommand("bench", "Tune and score several models side by side");
    bench_cmd->add_option("--data", bench_flags.data, "CSV files (repeatable)")
        ->required()
        ->expected(-1);
    bench_cmd->add_option("--target", bench_flags.target, "Target column in every file")
        ->capture_default_str();
    bench_cmd->add_flag("--header,!--no-header", bench_flags.header,
                        "First row is a header (default on)");
    add_train_options(bench_cmd, bench_flags.train);
    bench_cmd->add_option("--models", bench_flags.models, "Comma list of models")
        ->capture_default_str();
    bench_cmd->add_option("--depths", bench_flags.depths, "Oblique and cart depth grid")
        ->capture_default_str();
    bench_cmd->add_option("--rf-depths", bench_flags.rf_depths, "Forest depth grid")
        ->capture_default_str();
    bench_cmd->add_option("--rf-trees", bench_flags.rf_trees, "Forest size grid")
        ->capture_default_str();
    bench_cmd->add_option("--split", bench_flags.split, "50/25/25 or cv:<k>")
        ->capture_default_str();
    bench_cmd->add_option("--time-reps", bench_flags.time_reps, "Prediction timing repetitions")
        ->capture_default_str();
    bench_cmd->add_flag("--polish-linear", bench_flags.polish_linear,
                        "Apply the subtree pass to linear-leaf fits too");
    bench_cmd->add_option("--report", bench_flags.report, "Benchmark report JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help/version requests exit 0 through CLI11; real flag errors are
        // user errors.
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train_cmd->parsed()) {
            if (flag_polish && flag_no_polish)
                throw Error::user("--polish and --no-polish are mutually exclusive");
            if (flag_polish) train_flags.polish = true;
            if (flag_no_polish) train_flags.polish = false;
            return cmd_train(train_flags);
        }
        if (predict_cmd->parsed()) return cmd_predict(predict_flags);
        if (tune_cmd->parsed()) {
            if (tune_polish && tune_no_polish)
                throw Error::user("--polish and --no-polish are mutually exclusive");
            if (tune_polish) tune_flags.train.polish = true;
            if (tune_no_polish) tune_flags.train.polish = false;
            return cmd_tune(tune_flags);
        }
        if (bench_cmd->parsed()) return cmd_bench(bench_flags);
        std::fprintf(stderr, "no subcommand given\n");
        return 1;
    } catch (const Error& e) {
        std::fprintf(stderr, "obtree: %s\n", e.what());
        return e.kind() == ErrorKind::user ? 1 : 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "obtree: internal error: %s\n", e.what());
        return 2;
    }
}
