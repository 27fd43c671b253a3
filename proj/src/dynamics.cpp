#include "sorso/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sorso/errors.hpp"
#include "sorso/kv.hpp"
#include "sorso/rng.hpp"

namespace sorso {

namespace {

void encode_window(const HistoryWindow& w, int action_count, std::vector<double>& out) {
    out.assign(4 + 3 * action_count + 1, 0.0);
    for (int i = 0; i < 4; ++i) out[i] = w.positions[i];
    for (int i = 0; i < 3; ++i) out[4 + i * action_count + w.actions[i]] = 1.0;
    out.back() = 1.0;
}

// Solves A x = b in place, partial pivoting. A is n x n row-major.
std::vector<double> solve_linear(std::vector<double> A, std::vector<double> b) {
    int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[pivot * n + col])) pivot = r;
        if (A[pivot * n + col] == 0.0) throw NumericalError("dynamics fit: singular system");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(A[pivot * n + c], A[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        double inv = 1.0 / A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

std::uint64_t window_key_hash(const HistoryWindow& w, int action) {
    // Quantize positions to 1e-6 and hash the tuple.
    std::uint64_t h = 1469598103934665603ULL;
    auto mixin = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ULL;
    };
    for (double p : w.positions)
        mixin(static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(p * 1e6))));
    for (int a : w.actions) mixin(static_cast<std::uint64_t>(a));
    mixin(static_cast<std::uint64_t>(action));
    return h;
}

}  // namespace

const char* action_name(int action) {
    switch (action) {
        case 0: return "noop";
        case 1: return "up";
        case 2: return "down";
        case 3: return "left";
        case 4: return "right";
        default: throw UsageError("action_name: bad action id " + std::to_string(action));
    }
}

std::vector<DynamicsSample> collect_samples(const EnvConfig& cfg, int n_unique,
                                            std::uint64_t seed) {
    if (n_unique < 1) throw UsageError("collect_samples: n_unique must be >= 1");
    EnvConfig env_cfg = cfg;
    env_cfg.seed = mix_seed(seed, 0);
    MiniGameEnv env(env_cfg);
    RngStream policy(mix_seed(seed, 1));
    int n_actions = cfg.action_count();

    std::vector<DynamicsSample> out;
    out.reserve(n_unique);
    std::unordered_set<std::uint64_t> seen;
    long long budget = 100LL * n_unique;

    HistoryWindow window;
    window.fill(env.state().agent_pos.y);
    int warm = 0;  // pushes since the last discontinuity

    for (long long used = 0; used < budget; ++used) {
        int a = static_cast<int>(policy.uniform_int(n_actions));
        bool ready = warm >= 3;
        HistoryWindow before = window;
        StepResult r = env.step(static_cast<Action>(a));
        double next_y = r.state.agent_pos.y;
        if (ready && seen.insert(window_key_hash(before, a)).second) {
            out.push_back({before, a, next_y});
            if (static_cast<int>(out.size()) == n_unique) return out;
        }
        window.push(next_y, a);
        ++warm;
        if (r.done) {
            env.reset();
            window.fill(env.state().agent_pos.y);
            warm = 0;
        }
    }
    throw CollectionError("collect_samples: budget of " + std::to_string(budget) +
                          " steps exhausted with " + std::to_string(out.size()) + " of " +
                          std::to_string(n_unique) + " unique samples");
}

DynamicsModel train_dynamics(const std::vector<DynamicsSample>& data, const EnvConfig& cfg,
                             double ridge) {
    DynamicsModel m;
    m.game = cfg.game;
    m.action_count = cfg.action_count();
    int f = m.feature_len();
    m.weights.assign(m.action_count, std::vector<double>(f, 0.0));
    m.train_mae.assign(m.action_count, 0.0);

    std::vector<double> x;
    for (int a = 0; a < m.action_count; ++a) {
        std::vector<double> ata(static_cast<std::size_t>(f) * f, 0.0);
        std::vector<double> aty(f, 0.0);
        long long fitted = 0;
        for (const auto& s : data) {
            if (s.action != a) continue;
            if (!(s.next_position > 0.0 && s.next_position < 1.0)) continue;  // clamp-suspect
            encode_window(s.window, m.action_count, x);
            for (int i = 0; i < f; ++i) {
                if (x[i] == 0.0) continue;
                for (int j = 0; j < f; ++j) ata[i * f + j] += x[i] * x[j];
                aty[i] += x[i] * s.next_position;
            }
            ++fitted;
        }
        if (fitted == 0)
            throw CollectionError(std::string("train_dynamics: no usable samples for action `") +
                                  action_name(a) + "`");
        for (int i = 0; i < f; ++i) ata[i * f + i] += ridge;
        m.weights[a] = solve_linear(std::move(ata), std::move(aty));
    }

    std::vector<long long> counts(m.action_count, 0);
    for (const auto& s : data) {
        double err = std::abs(predict_next(m, s.window, s.action) - s.next_position);
        m.train_mae[s.action] += err;
        counts[s.action] += 1;
    }
    for (int a = 0; a < m.action_count; ++a)
        if (counts[a] > 0) m.train_mae[a] /= static_cast<double>(counts[a]);
    return m;
}

double predict_next(const DynamicsModel& m, const HistoryWindow& w, int action) {
    if (action < 0 || action >= m.action_count)
        throw UsageError("predict_next: action " + std::to_string(action) +
                         " outside the model's action set");
    const auto& wt = m.weights[action];
    double v = wt[4 + 3 * m.action_count];  // bias
    for (int i = 0; i < 4; ++i) v += wt[i] * w.positions[i];
    for (int i = 0; i < 3; ++i) v += wt[4 + i * m.action_count + w.actions[i]];
    return std::min(std::max(v, 0.0), 1.0);
}

void save_dynamics(const DynamicsModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write model: " + path);
    out << "dynmodel v1 " << MiniGameEnv::game_name(m.game) << "\n";
    for (int a = 0; a < m.action_count; ++a) {
        out << action_name(a) << ":";
        for (double w : m.weights[a]) out << " " << format_real(w);
        out << "\n";
    }
}

DynamicsModel load_dynamics(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read model: " + path);
    std::string word, version, game;
    in >> word >> version >> game;
    if (word != "dynmodel" || version != "v1")
        throw ConfigError(path + ": not a dynmodel v1 file");
    DynamicsModel m;
    if (game == "minipong")
        m.game = Game::MiniPong;
    else if (game == "minitennis")
        m.game = Game::MiniTennis;
    else
        throw ConfigError(path + ": unknown game `" + game + "`");
    m.action_count = m.game == Game::MiniPong ? 3 : 5;
    int f = m.feature_len();
    m.weights.assign(m.action_count, std::vector<double>(f, 0.0));
    m.train_mae.assign(m.action_count, 0.0);
    std::string rest;
    std::getline(in, rest);
    for (int a = 0; a < m.action_count; ++a) {
        std::string line;
        if (!std::getline(in, line)) throw ConfigError(path + ": truncated model file");
        std::istringstream ls(line);
        std::string label;
        ls >> label;
        if (label != std::string(action_name(a)) + ":")
            throw ConfigError(path + ": expected `" + std::string(action_name(a)) +
                              ":`, got `" + label + "`");
        for (int i = 0; i < f; ++i)
            if (!(ls >> m.weights[a][i]))
                throw ConfigError(path + ": short weight row for action " + action_name(a));
        double extra;
        if (ls >> extra) throw ConfigError(path + ": oversized weight row for " + action_name(a));
    }
    return m;
}

}  // namespace sorso
