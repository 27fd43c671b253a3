#include "sorso/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sorso/errors.hpp"
#include "sorso/kv.hpp"

namespace sorso {

namespace {

void check_shapes(const QWeights& w, int options, int features, const char* who) {
    if (w.option_count != options || w.feature_len != features)
        throw UsageError(std::string(who) + ": weight shape (" +
                         std::to_string(w.option_count) + "x" + std::to_string(w.feature_len) +
                         ") does not match " + std::to_string(options) + "x" +
                         std::to_string(features));
}

void anneal(LearnerState& ls, const LearnerConfig& cfg) {
    ls.epsilon = std::max(cfg.epsilon_min, ls.epsilon * (1.0 - cfg.epsilon_decay));
}

std::vector<int> initiable_ids(const std::vector<TemporalOption>& options, const GameState& s,
                               EventKind last_event) {
    std::vector<int> ids;
    for (const auto& o : options)
        if (option_initiable(o, s, last_event)) ids.push_back(o.id);
    if (ids.empty()) throw NumericalError("no initiable option in the current state");
    return ids;
}

}  // namespace

double max_q(const QWeights& w, std::span<const double> phi, const std::vector<int>& ids) {
    if (ids.empty()) throw UsageError("max_q: empty candidate set");
    double best = w.q_value(phi, ids[0]);
    for (std::size_t i = 1; i < ids.size(); ++i)
        best = std::max(best, w.q_value(phi, ids[i]));
    return best;
}

double QWeights::q_value(std::span<const double> phi, int o) const {
    if (o < 0 || o >= option_count) throw UsageError("q_value: option id out of range");
    if (static_cast<int>(phi.size()) != feature_len)
        throw UsageError("q_value: feature length mismatch");
    const double* b = w.data() + static_cast<std::size_t>(o) * feature_len;
    double s = 0.0;
    for (int i = 0; i < feature_len; ++i) s += b[i] * phi[i];
    return s;
}

std::vector<double> q_gradient(const QWeights& w, std::span<const double> phi, int o) {
    if (o < 0 || o >= w.option_count) throw UsageError("q_gradient: option id out of range");
    if (static_cast<int>(phi.size()) != w.feature_len)
        throw UsageError("q_gradient: feature length mismatch");
    std::vector<double> g(w.w.size(), 0.0);
    std::copy(phi.begin(), phi.end(), g.begin() + static_cast<std::size_t>(o) * w.feature_len);
    return g;
}

double TraceVector::inf_norm() const {
    double m = 0.0;
    for (double v : z) m = std::max(m, std::abs(v));
    return m;
}

double pow_int(double base, int k) {
    if (k < 0) throw UsageError("pow_int: negative exponent");
    double result = 1.0;
    double b = base;
    while (k > 0) {
        if (k & 1) result *= b;
        b *= b;
        k >>= 1;
    }
    return result;
}

void accumulate_segment(double& reward_sum, int& k, double reward, double gamma,
                        bool reverse_discount) {
    if (reverse_discount)
        reward_sum = gamma * reward_sum + reward;
    else
        reward_sum += pow_int(gamma, k) * reward;
    k += 1;
}

int select_option(const QWeights& w, std::span<const double> phi,
                  const std::vector<int>& initiable, double epsilon, RngStream& rng) {
    if (initiable.empty()) throw UsageError("select_option: empty initiable set");
    double u = rng.uniform();
    if (u < epsilon)
        return initiable[static_cast<std::size_t>(rng.uniform_int(initiable.size()))];
    int best = initiable[0];
    double best_q = w.q_value(phi, best);
    for (std::size_t i = 1; i < initiable.size(); ++i) {
        double q = w.q_value(phi, initiable[i]);
        if (q > best_q) {
            best = initiable[i];
            best_q = q;
        }
    }
    return best;
}

double segment_delta(const SegmentRecord& seg, double gamma) {
    if (seg.terminal) return seg.reward_sum - seg.q_start;
    return seg.reward_sum + pow_int(gamma, seg.length) * seg.q_boot - seg.q_start;
}

void apply_update(QWeights& w, TraceVector& z, double delta, int option_id, int k,
                  std::span<const double> phi_start, const LearnerConfig& cfg,
                  const std::vector<double>* lr_per_feature) {
    if (!std::isfinite(delta)) throw NumericalError("apply_update: non-finite TD error");
    if (static_cast<int>(z.z.size()) != w.option_count * w.feature_len)
        throw UsageError("apply_update: trace shape mismatch");
    double decay = pow_int(cfg.gamma * cfg.lambda, k);
    for (double& v : z.z) v *= decay;
    double* zb = z.z.data() + static_cast<std::size_t>(option_id) * w.feature_len;
    for (int i = 0; i < w.feature_len; ++i) zb[i] += phi_start[i];

    double bound = 1.0 / (1.0 - cfg.gamma * cfg.lambda) + 1.0;
    double zmax = z.inf_norm();
    if (!(zmax <= bound))
        throw NumericalError("apply_update: trace inf-norm " + std::to_string(zmax) +
                             " exceeds bound " + std::to_string(bound));

    int F = w.feature_len;
    double wmax = 0.0;
    for (int o = 0; o < w.option_count; ++o) {
        double* wb = w.w.data() + static_cast<std::size_t>(o) * F;
        const double* zo = z.z.data() + static_cast<std::size_t>(o) * F;
        for (int i = 0; i < F; ++i) {
            double rate = lr_per_feature ? (*lr_per_feature)[i] : cfg.alpha;
            wb[i] += rate * delta * zo[i];
            wmax = std::max(wmax, std::abs(wb[i]));
        }
    }
    if (!std::isfinite(wmax)) throw NumericalError("apply_update: non-finite weight");
}

EpisodeStats run_episode_sorso(MiniGameEnv& env, const std::vector<TemporalOption>& options,
                               const Featurizer& feat, QWeights& w, const LearnerConfig& cfg,
                               LearnerState& ls, RngStream& rng, const DynamicsModel* dynamics,
                               EpisodeLog* log) {
    check_shapes(w, static_cast<int>(options.size()), feat.feature_count(), "run_episode_sorso");
    std::vector<double> lr;
    if (cfg.lr_scaling) lr = feat.lr_scaling(cfg.alpha);
    const std::vector<double>* lrp = (cfg.lr_scaling && !lr.empty()) ? &lr : nullptr;

    TraceVector z;
    z.reset(static_cast<int>(w.w.size()));
    EpisodeStats stats;

    GameState s = env.reset();
    ControlContext ctl;
    ctl.dynamics = dynamics;
    ctl.window.fill(s.agent_pos.y);

    std::vector<double> phi;
    auto norm = normalize_state(s, env.config());
    feat.featurize(norm, phi);
    int o = select_option(w, phi, initiable_ids(options, s, EventKind::None), ls.epsilon, rng);
    double q_start = w.q_value(phi, o);
    double reward_sum = 0.0;
    int k = 0;
    std::vector<double> seg_rewards;

    std::vector<double> phi_next;
    for (;;) {
        Action a = intra_action(options[o], s, env.config(), ctl);
        StepResult out = env.step(a);
        ctl.window.push(out.state.agent_pos.y, static_cast<int>(a));
        stats.undiscounted_return += out.reward;
        stats.env_steps += 1;
        accumulate_segment(reward_sum, k, out.reward, cfg.gamma, cfg.reverse_discount);
        if (log) seg_rewards.push_back(out.reward);
        anneal(ls, cfg);
        s = out.state;

        if (out.done) {
            SegmentRecord seg;
            seg.option_id = o;
            seg.reward_sum = reward_sum;
            seg.length = k;
            seg.terminal = true;
            seg.q_start = q_start;
            seg.delta = segment_delta(seg, cfg.gamma);
            apply_update(w, z, seg.delta, o, k, phi, cfg, lrp);
            stats.segments += 1;
            if (log) {
                seg.rewards = std::move(seg_rewards);
                log->segments.push_back(std::move(seg));
            }
            break;
        }

        if (option_terminates(options[o], out.event, s, env.config())) {
            auto norm_next = normalize_state(s, env.config());
            feat.featurize(norm_next, phi_next);
            std::vector<int> ids = initiable_ids(options, s, out.event.kind);
            int o_next = select_option(w, phi_next, ids, ls.epsilon, rng);
            SegmentRecord seg;
            seg.option_id = o;
            seg.reward_sum = reward_sum;
            seg.length = k;
            seg.next_option = o_next;
            seg.q_start = q_start;
            seg.q_boot = cfg.rule == UpdateRule::Sarsa ? w.q_value(phi_next, o_next)
                                                       : max_q(w, phi_next, ids);
            seg.delta = segment_delta(seg, cfg.gamma);
            apply_update(w, z, seg.delta, o, k, phi, cfg, lrp);
            stats.segments += 1;
            if (log) {
                seg.rewards = std::move(seg_rewards);
                log->segments.push_back(std::move(seg));
            }
            o = o_next;
            phi.swap(phi_next);
            q_start = w.q_value(phi, o);
            reward_sum = 0.0;
            k = 0;
            seg_rewards.clear();
        }
    }
    return stats;
}

std::vector<double> FlatGameEnv::reset_episode() {
    GameState s = env_.reset();
    auto n = normalize_state(s, env_.config());
    return {n.begin(), n.end()};
}

TaskEnv::Out FlatGameEnv::step_action(int a) {
    StepResult r = env_.step(static_cast<Action>(a));
    auto n = normalize_state(r.state, env_.config());
    return {{n.begin(), n.end()}, r.reward, r.done};
}

EpisodeStats run_episode_sarsa(TaskEnv& env, const Featurizer& feat, QWeights& w,
                               const LearnerConfig& cfg, LearnerState& ls, RngStream& rng) {
    check_shapes(w, env.action_count(), feat.feature_count(), "run_episode_sarsa");
    std::vector<double> lr;
    if (cfg.lr_scaling) lr = feat.lr_scaling(cfg.alpha);
    const std::vector<double>* lrp = (cfg.lr_scaling && !lr.empty()) ? &lr : nullptr;

    TraceVector z;
    z.reset(static_cast<int>(w.w.size()));
    EpisodeStats stats;
    std::vector<int> all(env.action_count());
    std::iota(all.begin(), all.end(), 0);

    std::vector<double> phi, phi_next;
    feat.featurize(env.reset_episode(), phi);
    int a = select_option(w, phi, all, ls.epsilon, rng);
    double q_sa = w.q_value(phi, a);

    for (;;) {
        TaskEnv::Out out = env.step_action(a);
        stats.undiscounted_return += out.reward;
        stats.env_steps += 1;
        anneal(ls, cfg);

        SegmentRecord seg;
        seg.option_id = a;
        seg.reward_sum = out.reward;
        seg.length = 1;
        seg.q_start = q_sa;
        if (out.done) {
            seg.terminal = true;
            seg.delta = segment_delta(seg, cfg.gamma);
            apply_update(w, z, seg.delta, a, 1, phi, cfg, lrp);
            stats.segments += 1;
            break;
        }
        feat.featurize(out.state, phi_next);
        int a_next = select_option(w, phi_next, all, ls.epsilon, rng);
        seg.next_option = a_next;
        seg.q_boot = cfg.rule == UpdateRule::Sarsa ? w.q_value(phi_next, a_next)
                                                   : max_q(w, phi_next, all);
        seg.delta = segment_delta(seg, cfg.gamma);
        apply_update(w, z, seg.delta, a, 1, phi, cfg, lrp);
        stats.segments += 1;
        a = a_next;
        phi.swap(phi_next);
        q_sa = w.q_value(phi, a);
    }
    return stats;
}

void save_qweights(const QWeights& w, const std::string& game, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << "qweights v1 " << game << " " << w.option_count << " " << w.feature_len << "\n";
    for (int o = 0; o < w.option_count; ++o) {
        auto b = w.block(o);
        for (int i = 0; i < w.feature_len; ++i) {
            if (i) out << " ";
            out << format_real(b[i]);
        }
        out << "\n";
    }
}

LoadedWeights load_qweights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read checkpoint: " + path);
    std::string word, version, game;
    int options = 0, features = 0;
    in >> word >> version >> game >> options >> features;
    if (word != "qweights" || version != "v1" || options < 1 || features < 1)
        throw ConfigError(path + ": not a qweights v1 file");
    LoadedWeights lw;
    lw.game = game;
    lw.weights = QWeights(options, features);
    for (std::size_t i = 0; i < lw.weights.w.size(); ++i)
        if (!(in >> lw.weights.w[i]))
            throw ConfigError(path + ": truncated checkpoint");
    return lw;
}

}  // namespace sorso
