#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sorso/env.hpp"

namespace sorso {

// Rolling view of the agent paddle's lateral motion: the last 4 positions
// (oldest first) and the 3 actions taken between them (oldest first).
struct HistoryWindow {
    std::array<double, 4> positions{};
    std::array<int, 3> actions{};

    void fill(double position) {
        positions.fill(position);
        actions.fill(0);
    }
    void push(double position, int action) {
        positions = {positions[1], positions[2], positions[3], position};
        actions = {actions[1], actions[2], action};
    }
};

struct DynamicsSample {
    HistoryWindow window;
    int action = 0;
    double next_position = 0.0;
};

// Per-action linear model over [positions, one-hot action history, 1].
struct DynamicsModel {
    Game game = Game::MiniPong;
    int action_count = 3;
    std::vector<std::vector<double>> weights;  // [action][4 + 3*action_count + 1]
    std::vector<double> train_mae;             // per action, clamped predictions

    int feature_len() const { return 4 + 3 * action_count + 1; }
};

const char* action_name(int action);

// Rolls a uniform-random policy in the game, deduplicating on the
// (window, action) key quantized to 1e-6. Returns exactly n_unique samples or
// throws CollectionError after a step budget of 100 * n_unique.
std::vector<DynamicsSample> collect_samples(const EnvConfig& cfg, int n_unique,
                                            std::uint64_t seed);

// Per-action ridge least squares. The solve uses only samples whose labels
// are strictly inside (0,1); wall-clamped transitions are kept in the data
// and in the reported MAE (computed with clamped predictions) but would bias
// a pure linear fit. Throws CollectionError naming any action with no
// usable samples.
DynamicsModel train_dynamics(const std::vector<DynamicsSample>& data, const EnvConfig& cfg,
                             double ridge = 1e-8);

// Linear evaluation, clamped to [0,1].
double predict_next(const DynamicsModel& m, const HistoryWindow& w, int action);

// Text format: header `dynmodel v1 <game>`, then `action_name: w0 w1 ... wk`
// per action, 17 significant digits.
void save_dynamics(const DynamicsModel& m, const std::string& path);
DynamicsModel load_dynamics(const std::string& path);

}  // namespace sorso
