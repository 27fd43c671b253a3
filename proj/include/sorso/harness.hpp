#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sorso/env.hpp"
#include "sorso/learner.hpp"

namespace sorso {

// A full experiment: env + learner + run schedule. Loaded from a line-oriented
// `key = value` file; unknown keys are rejected, omitted keys take defaults,
// and the resolved form is echoed to output_dir/config.resolved.
struct ExperimentConfig {
    EnvConfig env = EnvConfig::defaults(Game::MiniPong);
    LearnerConfig learner;
    int fourier_order = 3;
    int max_features = 512;
    std::string mode = "hier";  // hier | flat
    int episodes = 2000;
    std::vector<std::uint64_t> seeds = {1};
    std::string output_dir = "out";
    int eval_every = 25;       // episodes between greedy evals; 0 disables
    int eval_points = 20;      // points played per eval
    long long max_steps = 0;   // per-seed env-step budget; 0 = unlimited
    std::string manifest_path;   // empty = game defaults
    std::string dynamics_path;   // empty = analytic controllers
    int pretrain_samples = 50000;
    double ridge = 1e-8;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& source);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

struct CurvePoint {
    long long episode = 0;
    long long steps = 0;  // cumulative training env steps
    double value = 0.0;   // return (train curves) or win rate (eval curves)
    double ma10 = 0.0;
};

struct LearningCurve {
    std::vector<CurvePoint> points;
};

// Trailing mean over a window, partial from the start.
std::vector<double> moving_average(const std::vector<double>& xs, int window);

struct SeedRunResult {
    std::uint64_t seed = 0;
    LearningCurve train;
    LearningCurve eval;
    long long total_steps = 0;
};

struct ExperimentResult {
    std::vector<SeedRunResult> runs;
};

// Trains every seed, writing per-seed train/eval CSVs, a weight checkpoint,
// and config.resolved into output_dir. Byte-identical on re-runs.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Greedy (epsilon = 0) play for `points` scored points; returns the agent's
// point-win rate. Hierarchical when options are non-primitive.
double play_points_greedy(MiniGameEnv& env, const std::vector<TemporalOption>& options,
                          const Featurizer& feat, const QWeights& w, int points,
                          const DynamicsModel* dynamics, RngStream& rng);

LearningCurve read_curve_csv(const std::string& path);
void write_curve_csv(const LearningCurve& curve, const std::string& value_header,
                     const std::string& path);

struct CompareSeedRow {
    std::uint64_t seed = 0;
    bool reached = false;
    long long steps = 0;       // steps to threshold (when reached)
    long long budget = 0;      // total steps consumed by the run
    double final_ma = 0.0;
};

struct CompareReport {
    double threshold = 0.0;
    std::vector<CompareSeedRow> hier;
    std::vector<CompareSeedRow> flat;
    bool hier_reached = false;     // any seed reached => median over reaching seeds
    bool flat_reached = false;
    double hier_median_steps = 0.0;
    double flat_median_steps = 0.0;
    double ratio = 0.0;            // flat / hier steps-to-threshold
    bool ratio_is_lower_bound = false;  // flat censored: ratio uses its budget
    std::string text;              // rendered table
    std::string csv;
};

// Steps-to-threshold comparison over eval win-rate curves (first point whose
// ma10 >= threshold). Curves that never reach are censored and excluded from
// medians; a fully censored flat side turns the ratio into a lower bound.
CompareReport compare_curves(const std::vector<CompareSeedRow>& hier_rows,
                             const std::vector<CompareSeedRow>& flat_rows, double threshold);
CompareSeedRow curve_threshold_row(std::uint64_t seed, const LearningCurve& eval,
                                   double threshold);

}  // namespace sorso
