#include "sorso/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sorso/errors.hpp"
#include "sorso/kv.hpp"
#include "sorso/manifest.hpp"

namespace sorso {

namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

double real_in(const KvEntry& e, double lo, double hi, bool hi_open = false) {
    double v = kv_to_real(e);
    bool ok = hi_open ? (v >= lo && v < hi) : (v >= lo && v <= hi);
    if (!ok)
        throw ConfigError("line " + std::to_string(e.line) + ": key `" + e.key + "` = " +
                          e.value + " outside [" + format_real(lo) + ", " + format_real(hi) +
                          (hi_open ? ")" : "]"));
    return v;
}

int int_at_least(const KvEntry& e, int lo) {
    int v = kv_to_int(e);
    if (v < lo)
        throw ConfigError("line " + std::to_string(e.line) + ": key `" + e.key +
                          "` must be >= " + std::to_string(lo));
    return v;
}

std::string join_u64(const std::vector<std::uint64_t>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(vs[i]);
    }
    return out;
}

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    if (n == 0) return 0.0;
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
    auto entries = parse_kv_text(text, source);
    Game game = Game::MiniPong;
    for (const auto& e : entries) {
        if (e.key == "game") {
            if (e.value == "minipong")
                game = Game::MiniPong;
            else if (e.value == "minitennis")
                game = Game::MiniTennis;
            else
                throw ConfigError(source + ":" + std::to_string(e.line) + ": unknown game `" +
                                  e.value + "`");
        }
    }
    ExperimentConfig cfg;
    cfg.env = EnvConfig::defaults(game);

    for (const auto& e : entries) {
        const std::string& k = e.key;
        if (k == "game") {
        } else if (k == "mode") {
            require(e.value == "hier" || e.value == "flat",
                    "line " + std::to_string(e.line) + ": mode must be hier|flat");
            cfg.mode = e.value;
        } else if (k == "episodes") {
            cfg.episodes = int_at_least(e, 1);
        } else if (k == "seeds") {
            cfg.seeds = kv_to_u64_list(e);
            require(!cfg.seeds.empty(), "seeds must be non-empty");
        } else if (k == "output_dir") {
            cfg.output_dir = e.value;
        } else if (k == "eval_every") {
            cfg.eval_every = int_at_least(e, 0);
        } else if (k == "eval_points") {
            cfg.eval_points = int_at_least(e, 1);
        } else if (k == "max_steps") {
            cfg.max_steps = int_at_least(e, 0);
        } else if (k == "manifest") {
            cfg.manifest_path = e.value;
        } else if (k == "dynamics_model") {
            cfg.dynamics_path = e.value;
        } else if (k == "pretrain_samples") {
            cfg.pretrain_samples = int_at_least(e, 1);
        } else if (k == "ridge") {
            cfg.ridge = real_in(e, 0.0, 1.0);
            require(cfg.ridge > 0.0, "ridge must be > 0");
        } else if (k == "paddle_height") {
            cfg.env.paddle_height = real_in(e, 1e-6, 1.0);
        } else if (k == "ball_height") {
            cfg.env.ball_height = real_in(e, 1e-6, 1.0);
        } else if (k == "paddle_step") {
            cfg.env.paddle_step = real_in(e, 1e-6, 1.0);
        } else if (k == "paddle_momentum") {
            cfg.env.paddle_momentum = real_in(e, 0.0, 1.0, true);
        } else if (k == "paddle_noise_std") {
            cfg.env.paddle_noise_std = real_in(e, 0.0, 1.0);
        } else if (k == "ball_speed") {
            cfg.env.ball_speed = real_in(e, 1e-6, 1.0);
        } else if (k == "angle_gain") {
            cfg.env.angle_gain = real_in(e, 0.0, 10.0);
        } else if (k == "opponent_speed") {
            cfg.env.opponent_speed = real_in(e, 0.0, 1.0);
        } else if (k == "opponent_reaction_lag") {
            cfg.env.opponent_reaction_lag = int_at_least(e, 0);
        } else if (k == "points_to_win") {
            cfg.env.points_to_win = int_at_least(e, 1);
        } else if (k == "depth_base") {
            cfg.env.depth_base = real_in(e, 0.0, 1.0);
        } else if (k == "depth_gain") {
            cfg.env.depth_gain = real_in(e, 0.0, 2.0);
        } else if (k == "point_step_cap") {
            cfg.env.point_step_cap = int_at_least(e, 1);
        } else if (k == "alpha") {
            cfg.learner.alpha = real_in(e, 0.0, 1.0);
            require(cfg.learner.alpha > 0.0, "alpha must be > 0");
        } else if (k == "gamma") {
            cfg.learner.gamma = real_in(e, 0.0, 1.0, true);
        } else if (k == "lambda") {
            cfg.learner.lambda = real_in(e, 0.0, 1.0);
        } else if (k == "epsilon_start") {
            cfg.learner.epsilon_start = real_in(e, 0.0, 1.0);
        } else if (k == "epsilon_min") {
            cfg.learner.epsilon_min = real_in(e, 0.0, 1.0);
        } else if (k == "epsilon_decay") {
            cfg.learner.epsilon_decay = real_in(e, 0.0, 1.0, true);
        } else if (k == "update_rule") {
            if (e.value == "sarsa")
                cfg.learner.rule = UpdateRule::Sarsa;
            else if (e.value == "qlearning")
                cfg.learner.rule = UpdateRule::QLearning;
            else
                throw ConfigError("line " + std::to_string(e.line) +
                                  ": update_rule must be sarsa|qlearning");
        } else if (k == "fourier_order") {
            cfg.fourier_order = int_at_least(e, 0);
        } else if (k == "max_features") {
            cfg.max_features = int_at_least(e, 0);
        } else if (k == "lr_scaling") {
            cfg.learner.lr_scaling = kv_to_on_off(e);
        } else if (k == "reverse_discount") {
            cfg.learner.reverse_discount = kv_to_on_off(e);
        } else {
            throw ConfigError(source + ":" + std::to_string(e.line) + ": unknown key `" + k +
                              "`");
        }
    }
    require(cfg.learner.epsilon_min <= cfg.learner.epsilon_start,
            "epsilon_min must be <= epsilon_start");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "game = " << MiniGameEnv::game_name(cfg.env.game) << "\n";
    os << "mode = " << cfg.mode << "\n";
    os << "episodes = " << cfg.episodes << "\n";
    os << "seeds = " << join_u64(cfg.seeds) << "\n";
    os << "output_dir = " << cfg.output_dir << "\n";
    os << "eval_every = " << cfg.eval_every << "\n";
    os << "eval_points = " << cfg.eval_points << "\n";
    os << "max_steps = " << cfg.max_steps << "\n";
    if (!cfg.manifest_path.empty()) os << "manifest = " << cfg.manifest_path << "\n";
    if (!cfg.dynamics_path.empty()) os << "dynamics_model = " << cfg.dynamics_path << "\n";
    os << "pretrain_samples = " << cfg.pretrain_samples << "\n";
    os << "ridge = " << format_real(cfg.ridge) << "\n";
    os << "paddle_height = " << format_real(cfg.env.paddle_height) << "\n";
    os << "ball_height = " << format_real(cfg.env.ball_height) << "\n";
    os << "paddle_step = " << format_real(cfg.env.paddle_step) << "\n";
    os << "paddle_momentum = " << format_real(cfg.env.paddle_momentum) << "\n";
    os << "paddle_noise_std = " << format_real(cfg.env.paddle_noise_std) << "\n";
    os << "ball_speed = " << format_real(cfg.env.ball_speed) << "\n";
    os << "angle_gain = " << format_real(cfg.env.angle_gain) << "\n";
    os << "opponent_speed = " << format_real(cfg.env.opponent_speed) << "\n";
    os << "opponent_reaction_lag = " << cfg.env.opponent_reaction_lag << "\n";
    os << "points_to_win = " << cfg.env.points_to_win << "\n";
    os << "depth_base = " << format_real(cfg.env.depth_base) << "\n";
    os << "depth_gain = " << format_real(cfg.env.depth_gain) << "\n";
    os << "point_step_cap = " << cfg.env.point_step_cap << "\n";
    os << "alpha = " << format_real(cfg.learner.alpha) << "\n";
    os << "gamma = " << format_real(cfg.learner.gamma) << "\n";
    os << "lambda = " << format_real(cfg.learner.lambda) << "\n";
    os << "epsilon_start = " << format_real(cfg.learner.epsilon_start) << "\n";
    os << "epsilon_min = " << format_real(cfg.learner.epsilon_min) << "\n";
    os << "epsilon_decay = " << format_real(cfg.learner.epsilon_decay) << "\n";
    os << "update_rule = " << (cfg.learner.rule == UpdateRule::Sarsa ? "sarsa" : "qlearning")
       << "\n";
    os << "fourier_order = " << cfg.fourier_order << "\n";
    os << "max_features = " << cfg.max_features << "\n";
    os << "lr_scaling = " << (cfg.learner.lr_scaling ? "on" : "off") << "\n";
    os << "reverse_discount = " << (cfg.learner.reverse_discount ? "on" : "off") << "\n";
    return os.str();
}

std::vector<double> moving_average(const std::vector<double>& xs, int window) {
    if (window < 1) throw UsageError("moving_average: window must be >= 1");
    std::vector<double> out(xs.size(), 0.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sum += xs[i];
        if (i >= static_cast<std::size_t>(window)) sum -= xs[i - window];
        std::size_t n = std::min<std::size_t>(i + 1, window);
        out[i] = sum / static_cast<double>(n);
    }
    return out;
}

double play_points_greedy(MiniGameEnv& env, const std::vector<TemporalOption>& options,
                          const Featurizer& feat, const QWeights& w, int points,
                          const DynamicsModel* dynamics, RngStream& rng) {
    if (points < 1) throw UsageError("play_points_greedy: points must be >= 1");
    env.reset();
    ControlContext ctl;
    ctl.dynamics = dynamics;
    ctl.window.fill(env.state().agent_pos.y);

    std::vector<double> phi;
    auto pick = [&](const GameState& s, EventKind ev) {
        auto norm = normalize_state(s, env.config());
        feat.featurize(norm, phi);
        std::vector<int> ids;
        for (const auto& o : options)
            if (option_initiable(o, s, ev)) ids.push_back(o.id);
        if (ids.empty()) throw NumericalError("no initiable option during eval");
        return select_option(w, phi, ids, 0.0, rng);
    };

    GameState s = env.state();
    int o = pick(s, EventKind::None);
    int agent = 0, total = 0;
    while (total < points) {
        Action a = intra_action(options[o], s, env.config(), ctl);
        StepResult out = env.step(a);
        ctl.window.push(out.state.agent_pos.y, static_cast<int>(a));
        s = out.state;
        if (out.event.kind == EventKind::AgentScored) {
            ++agent;
            ++total;
        } else if (out.event.kind == EventKind::OpponentScored) {
            ++total;
        }
        if (total >= points) break;
        if (out.done) {
            s = env.reset();
            ctl.window.fill(s.agent_pos.y);
            o = pick(s, EventKind::None);
        } else if (option_terminates(options[o], out.event, s, env.config())) {
            o = pick(s, out.event.kind);
        }
    }
    return static_cast<double>(agent) / static_cast<double>(points);
}

void write_curve_csv(const LearningCurve& curve, const std::string& value_header,
                     const std::string& path) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw ConfigError("cannot write curve: " + path);
    outf << "episode,steps," << value_header << ",ma10\n";
    for (const auto& p : curve.points)
        outf << p.episode << "," << p.steps << "," << format_real(p.value) << ","
             << format_real(p.ma10) << "\n";
}

LearningCurve read_curve_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read curve: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty curve file");
    LearningCurve c;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f0, f1, f2, f3;
        if (!(std::getline(ls, f0, ',') && std::getline(ls, f1, ',') &&
              std::getline(ls, f2, ',') && std::getline(ls, f3)))
            throw ConfigError(path + ":" + std::to_string(lineno) + ": bad curve row");
        CurvePoint p;
        p.episode = std::stoll(f0);
        p.steps = std::stoll(f1);
        p.value = std::stod(f2);
        p.ma10 = std::stod(f3);
        c.points.push_back(p);
    }
    return c;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    require(cfg.mode == "hier" || cfg.mode == "flat", "mode must be hier|flat");
    fs::create_directories(cfg.output_dir);
    {
        std::ofstream res(fs::path(cfg.output_dir) / "config.resolved", std::ios::binary);
        if (!res) throw ConfigError("cannot write config.resolved in " + cfg.output_dir);
        res << serialize_config(cfg);
    }

    InstructionManifest manifest = cfg.manifest_path.empty()
                                       ? default_manifest(cfg.env.game)
                                       : load_manifest(cfg.manifest_path);
    DynamicsModel dyn;
    bool have_dyn = false;
    if (!cfg.dynamics_path.empty()) {
        dyn = load_dynamics(cfg.dynamics_path);
        if (dyn.game != cfg.env.game)
            throw ConfigError("dynamics model game does not match the experiment game");
        have_dyn = true;
    }

    ExperimentResult result;
    for (std::uint64_t seed : cfg.seeds) {
        EnvConfig ec = cfg.env;
        ec.seed = mix_seed(seed, 0);
        MiniGameEnv env(ec);
        FlatGameEnv flat(env);
        FourierBasis basis(cfg.fourier_order, 8, cfg.max_features);
        RngStream learner_rng(mix_seed(seed, 1));
        std::vector<TemporalOption> options =
            cfg.mode == "hier" ? compile_options(manifest, ec) : primitive_options(ec);
        QWeights w(static_cast<int>(options.size()), basis.feature_count());
        LearnerState ls(cfg.learner);

        SeedRunResult run;
        run.seed = seed;
        std::vector<double> train_vals, eval_vals;
        long long cum = 0;

        for (int ep = 1; ep <= cfg.episodes; ++ep) {
            if (cfg.max_steps > 0 && cum >= cfg.max_steps) break;
            EpisodeStats st;
            if (cfg.mode == "hier")
                st = run_episode_sorso(env, options, basis, w, cfg.learner, ls, learner_rng,
                                       have_dyn ? &dyn : nullptr);
            else
                st = run_episode_sarsa(flat, basis, w, cfg.learner, ls, learner_rng);
            cum += st.env_steps;
            train_vals.push_back(st.undiscounted_return);
            run.train.points.push_back({ep, cum, st.undiscounted_return, 0.0});

            if (cfg.eval_every > 0 && ep % cfg.eval_every == 0) {
                EnvConfig evc = cfg.env;
                evc.seed = mix_seed(seed, 10000 + static_cast<std::uint64_t>(ep));
                MiniGameEnv eval_env(evc);
                RngStream eval_rng(mix_seed(seed, 20000 + static_cast<std::uint64_t>(ep)));
                double rate = play_points_greedy(eval_env, options, basis, w, cfg.eval_points,
                                                 have_dyn ? &dyn : nullptr, eval_rng);
                eval_vals.push_back(rate);
                run.eval.points.push_back({ep, cum, rate, 0.0});
            }
        }

        auto tma = moving_average(train_vals, 10);
        for (std::size_t i = 0; i < tma.size(); ++i) run.train.points[i].ma10 = tma[i];
        auto ema = moving_average(eval_vals, 10);
        for (std::size_t i = 0; i < ema.size(); ++i) run.eval.points[i].ma10 = ema[i];
        run.total_steps = cum;

        std::string tag = std::to_string(seed);
        write_curve_csv(run.train, "return",
                        (fs::path(cfg.output_dir) / ("train_seed" + tag + ".csv")).string());
        if (!run.eval.points.empty())
            write_curve_csv(run.eval, "winrate",
                            (fs::path(cfg.output_dir) / ("eval_seed" + tag + ".csv")).string());
        save_qweights(w, MiniGameEnv::game_name(ec.game),
                      (fs::path(cfg.output_dir) / ("weights_seed" + tag + ".txt")).string());
        result.runs.push_back(std::move(run));
    }
    return result;
}

CompareSeedRow curve_threshold_row(std::uint64_t seed, const LearningCurve& eval,
                                   double threshold) {
    CompareSeedRow row;
    row.seed = seed;
    for (const auto& p : eval.points) {
        if (!row.reached && p.ma10 >= threshold) {
            row.reached = true;
            row.steps = p.steps;
        }
    }
    if (!eval.points.empty()) {
        row.budget = eval.points.back().steps;
        row.final_ma = eval.points.back().ma10;
    }
    return row;
}

CompareReport compare_curves(const std::vector<CompareSeedRow>& hier_rows,
                             const std::vector<CompareSeedRow>& flat_rows, double threshold) {
    CompareReport rep;
    rep.threshold = threshold;
    rep.hier = hier_rows;
    rep.flat = flat_rows;

    std::vector<double> hs, fsd;
    for (const auto& r : hier_rows)
        if (r.reached) hs.push_back(static_cast<double>(r.steps));
    for (const auto& r : flat_rows)
        if (r.reached) fsd.push_back(static_cast<double>(r.steps));
    rep.hier_reached = !hs.empty();
    rep.flat_reached = !fsd.empty();
    rep.hier_median_steps = median(hs);
    rep.flat_median_steps = median(fsd);

    if (rep.hier_reached && rep.flat_reached) {
        rep.ratio = rep.flat_median_steps / rep.hier_median_steps;
    } else if (rep.hier_reached && !flat_rows.empty()) {
        long long min_budget = flat_rows[0].budget;
        for (const auto& r : flat_rows) min_budget = std::min(min_budget, r.budget);
        rep.ratio = static_cast<double>(min_budget) / rep.hier_median_steps;
        rep.ratio_is_lower_bound = true;
    }

    std::ostringstream txt;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "steps to ma10 win-rate >= %.4g\n", threshold);
    txt << buf;
    txt << "  arm       seed          steps         budget  final_ma10\n";
    auto emit = [&](const char* arm, const CompareSeedRow& r) {
        std::string steps = r.reached ? std::to_string(r.steps) : std::string("not reached");
        std::snprintf(buf, sizeof(buf), "  %-8s %6llu %14s %14lld      %.4f\n", arm,
                      static_cast<unsigned long long>(r.seed), steps.c_str(), r.budget,
                      r.final_ma);
        txt << buf;
    };
    for (const auto& r : hier_rows) emit("hier", r);
    for (const auto& r : flat_rows) emit("flat", r);
    if (rep.hier_reached)
        txt << "  hier median steps: " << format_real(rep.hier_median_steps) << "\n";
    else
        txt << "  hier median steps: not reached\n";
    if (rep.flat_reached)
        txt << "  flat median steps: " << format_real(rep.flat_median_steps) << "\n";
    else
        txt << "  flat median steps: not reached\n";
    if (rep.hier_reached) {
        std::snprintf(buf, sizeof(buf), "  flat/hier ratio: %s%.4g%s\n",
                      rep.ratio_is_lower_bound ? ">= " : "", rep.ratio,
                      rep.ratio_is_lower_bound ? " (flat censored at budget)" : "");
        txt << buf;
    } else {
        txt << "  flat/hier ratio: undefined (hier never reached)\n";
    }
    rep.text = txt.str();

    std::ostringstream csv;
    csv << "arm,seed,reached,steps_to_threshold,total_steps,final_ma10\n";
    auto emit_csv = [&](const char* arm, const CompareSeedRow& r) {
        csv << arm << "," << r.seed << "," << (r.reached ? "yes" : "no") << ","
            << (r.reached ? std::to_string(r.steps) : "") << "," << r.budget << ","
            << format_real(r.final_ma) << "\n";
    };
    for (const auto& r : hier_rows) emit_csv("hier", r);
    for (const auto& r : flat_rows) emit_csv("flat", r);
    rep.csv = csv.str();
    return rep;
}

}  // namespace sorso
