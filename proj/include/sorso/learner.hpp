#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sorso/env.hpp"
#include "sorso/fourier.hpp"
#include "sorso/options.hpp"
#include "sorso/rng.hpp"

namespace sorso {

// Linear option-value weights: one feature-length block per option, zero-init.
struct QWeights {
    int option_count = 0;
    int feature_len = 0;
    std::vector<double> w;

    QWeights() = default;
    QWeights(int options, int features)
        : option_count(options),
          feature_len(features),
          w(static_cast<std::size_t>(options) * features, 0.0) {}

    std::span<double> block(int o) {
        return {w.data() + static_cast<std::size_t>(o) * feature_len,
                static_cast<std::size_t>(feature_len)};
    }
    std::span<const double> block(int o) const {
        return {w.data() + static_cast<std::size_t>(o) * feature_len,
                static_cast<std::size_t>(feature_len)};
    }

    double q_value(std::span<const double> phi, int o) const;
};

// dQ/dw for linear Q: phi in block o, zero elsewhere.
std::vector<double> q_gradient(const QWeights& w, std::span<const double> phi, int o);

struct TraceVector {
    std::vector<double> z;
    void reset(int n) { z.assign(n, 0.0); }
    double inf_norm() const;
};

enum class UpdateRule { Sarsa, QLearning };

struct LearnerConfig {
    double alpha = 5e-5;
    double gamma = 0.99;
    double lambda = 0.99;
    double epsilon_start = 1.0;
    double epsilon_min = 0.01;
    double epsilon_decay = 2e-5;  // per env step: eps <- max(min, eps*(1-decay))
    UpdateRule rule = UpdateRule::Sarsa;
    bool lr_scaling = false;       // per-feature alpha / max(||c||,1)
    bool reverse_discount = false; // R <- gamma*R + r instead of R += gamma^k * r
};

// Epsilon persists across episodes; traces do not.
struct LearnerState {
    double epsilon = 1.0;
    LearnerState() = default;
    explicit LearnerState(const LearnerConfig& c) : epsilon(c.epsilon_start) {}
};

// One closed option segment, as used by the k-step TD update.
struct SegmentRecord {
    int option_id = -1;
    double reward_sum = 0.0;  // discounted: sum_i gamma^(i-1) r_i
    int length = 0;           // k
    int next_option = -1;     // -1 when the segment ended at a terminal state
    bool terminal = false;
    double q_start = 0.0;     // Q(s, o) at segment start, pre-update weights
    double q_boot = 0.0;      // bootstrap Q(s', o') (Sarsa) or max Q(s', .) (QLearning)
    double delta = 0.0;
    std::vector<double> rewards;  // raw per-step rewards (filled only when logging)
};

struct EpisodeLog {
    std::vector<SegmentRecord> segments;
};

struct EpisodeStats {
    double undiscounted_return = 0.0;
    int env_steps = 0;
    int segments = 0;
};

// base^k for integer k >= 0 by squaring; pow_int(b, 1) == b exactly.
double pow_int(double base, int k);

// Folds one reward into a segment: reward_sum += gamma^k * r (or the reversed
// form), then k += 1.
void accumulate_segment(double& reward_sum, int& k, double reward, double gamma,
                        bool reverse_discount);

// Epsilon-greedy over the initiable ids (ascending); greedy ties resolve to
// the lowest id. Draws one uniform, plus one more only on explore.
int select_option(const QWeights& w, std::span<const double> phi,
                  const std::vector<int>& initiable, double epsilon, RngStream& rng);

// Best value over a candidate option set; the off-policy bootstrap.
double max_q(const QWeights& w, std::span<const double> phi, const std::vector<int>& ids);

// k-step TD error. Terminal: R - q_start. Sarsa: R + gamma^k q_boot - q_start.
double segment_delta(const SegmentRecord& seg, double gamma);

// z <- (gamma*lambda)^k z + phi_start in block o; w += alpha * delta * z.
// Throws NumericalError on non-finite delta or a trace-bound violation.
void apply_update(QWeights& w, TraceVector& z, double delta, int option_id, int k,
                  std::span<const double> phi_start, const LearnerConfig& cfg,
                  const std::vector<double>* lr_per_feature);

// Semi-MDP episode: call-and-return option execution, one k-step update per
// closed segment, per-step epsilon anneal, segments never span points.
EpisodeStats run_episode_sorso(MiniGameEnv& env, const std::vector<TemporalOption>& options,
                               const Featurizer& feat, QWeights& w, const LearnerConfig& cfg,
                               LearnerState& ls, RngStream& rng,
                               const DynamicsModel* dynamics = nullptr,
                               EpisodeLog* log = nullptr);

// Flat-learner view of an environment.
class TaskEnv {
public:
    virtual ~TaskEnv() = default;
    virtual int action_count() const = 0;
    virtual std::vector<double> reset_episode() = 0;
    struct Out {
        std::vector<double> state;
        double reward = 0.0;
        bool done = false;
    };
    virtual Out step_action(int a) = 0;
};

// MiniGameEnv exposed flatly through normalize_state.
class FlatGameEnv : public TaskEnv {
public:
    explicit FlatGameEnv(MiniGameEnv& env) : env_(env) {}
    int action_count() const override { return env_.config().action_count(); }
    std::vector<double> reset_episode() override;
    Out step_action(int a) override;

private:
    MiniGameEnv& env_;
};

// One-step SARSA(lambda) with accumulating traces; arithmetic matches the
// semi-MDP learner's k=1 segments exactly.
EpisodeStats run_episode_sarsa(TaskEnv& env, const Featurizer& feat, QWeights& w,
                               const LearnerConfig& cfg, LearnerState& ls, RngStream& rng);

// Text format: `qweights v1 <game> <option_count> <feature_len>`, then one
// line per option block, 17 significant digits.
void save_qweights(const QWeights& w, const std::string& game, const std::string& path);
struct LoadedWeights {
    QWeights weights;
    std::string game;
};
LoadedWeights load_qweights(const std::string& path);

}  // namespace sorso
