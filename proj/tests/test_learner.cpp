#include <cmath>
#include <cstdio>
#include <numeric>

#include "doctest.h"
#include "sorso/errors.hpp"
#include "sorso/learner.hpp"
#include "sorso/manifest.hpp"

using namespace sorso;

TEST_CASE("integer powers are exact at small exponents") {
    CHECK(pow_int(0.93, 0) == 1.0);
    CHECK(pow_int(0.93, 1) == 0.93);
    CHECK(pow_int(2.0, 10) == 1024.0);
    CHECK(pow_int(0.5, 3) == 0.125);
}

TEST_CASE("segment accumulation discounts forward") {
    double R = 0.0;
    int k = 0;
    for (double r : {1.0, 0.0, 0.0, 2.0}) accumulate_segment(R, k, r, 0.5, false);
    CHECK(k == 4);
    CHECK(R == doctest::Approx(1.25).epsilon(1e-15));  // 1 + 2 * 0.5^3
}

TEST_CASE("reversed accumulation reproduces the alternative recursion") {
    // R <- gamma*R + r applied per step
    double R = 0.0;
    int k = 0;
    for (double r : {1.0, 0.0, 0.0, 2.0}) accumulate_segment(R, k, r, 0.5, true);
    CHECK(k == 4);
    double expect = 0.0;
    for (double r : {1.0, 0.0, 0.0, 2.0}) expect = 0.5 * expect + r;
    CHECK(R == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("segment TD error matches a pow-based oracle") {
    RngStream rng(41);
    for (int it = 0; it < 2000; ++it) {
        SegmentRecord seg;
        seg.length = 1 + static_cast<int>(rng.uniform_int(60));
        seg.reward_sum = rng.uniform(-3.0, 3.0);
        seg.q_start = rng.uniform(-2.0, 2.0);
        seg.q_boot = rng.uniform(-2.0, 2.0);
        seg.terminal = rng.uniform() < 0.3;
        double gamma = rng.uniform(0.0, 0.999);
        double want = seg.terminal
                          ? seg.reward_sum - seg.q_start
                          : seg.reward_sum + std::pow(gamma, seg.length) * seg.q_boot -
                                seg.q_start;
        CHECK(std::abs(segment_delta(seg, gamma) - want) <= 1e-12);
    }
}

TEST_CASE("value gradient is the feature block") {
    QWeights w(4, 6);
    std::vector<double> phi = {0.5, -0.25, 1.0, 0.0, 0.75, -1.0};
    auto g = q_gradient(w, phi, 2);
    REQUIRE(g.size() == 24);
    for (int o = 0; o < 4; ++o)
        for (int i = 0; i < 6; ++i) CHECK(g[o * 6 + i] == (o == 2 ? phi[i] : 0.0));
}

TEST_CASE("value gradient matches central finite differences") {
    RngStream rng(43);
    for (int cs = 0; cs < 100; ++cs) {
        int options = 2 + static_cast<int>(rng.uniform_int(4));
        int feats = 3 + static_cast<int>(rng.uniform_int(5));
        QWeights w(options, feats);
        for (auto& x : w.w) x = rng.uniform(-1.0, 1.0);
        std::vector<double> phi(feats);
        for (auto& x : phi) x = rng.uniform(-1.0, 1.0);
        int o = static_cast<int>(rng.uniform_int(options));
        auto g = q_gradient(w, phi, o);
        double h = 1e-6;
        for (int i = 0; i < options * feats; ++i) {
            QWeights wp = w, wm = w;
            wp.w[i] += h;
            wm.w[i] -= h;
            double fd = (wp.q_value(phi, o) - wm.q_value(phi, o)) / (2 * h);
            double scale = std::max({1.0, std::abs(fd), std::abs(g[i])});
            CHECK(std::abs(g[i] - fd) / scale <= 1e-8);
        }
    }
}

TEST_CASE("trace update follows the discounted recursion exactly") {
    const double gamma = 0.97, lambda = 0.9;
    LearnerConfig cfg;
    cfg.gamma = gamma;
    cfg.lambda = lambda;
    cfg.alpha = 0.0;  // isolate the trace arithmetic
    QWeights w(3, 4);
    TraceVector z;
    z.reset(12);

    RngStream rng(47);
    std::vector<std::vector<double>> grads;
    std::vector<int> lens;
    for (int seg = 0; seg < 8; ++seg) {
        std::vector<double> phi(4);
        for (auto& x : phi) x = rng.uniform(-1.0, 1.0);
        int o = static_cast<int>(rng.uniform_int(3));
        int k = 1 + static_cast<int>(rng.uniform_int(10));
        apply_update(w, z, 0.1, o, k, phi, cfg, nullptr);
        grads.push_back(q_gradient(w, phi, o));
        lens.push_back(k);
    }
    // closed form: z = sum_i (gamma*lambda)^(sum of later k) grad_i
    std::vector<double> expect(12, 0.0);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        int later = std::accumulate(lens.begin() + i + 1, lens.end(), 0);
        double f = std::pow(gamma * lambda, later);
        for (int j = 0; j < 12; ++j) expect[j] += f * grads[i][j];
    }
    for (int j = 0; j < 12; ++j) CHECK(std::abs(z.z[j] - expect[j]) <= 1e-12);
}

TEST_CASE("trace norm respects the geometric bound under unit features") {
    const double gamma = 0.99, lambda = 0.99;
    LearnerConfig cfg;
    cfg.gamma = gamma;
    cfg.lambda = lambda;
    cfg.alpha = 1e-6;
    QWeights w(2, 3);
    TraceVector z;
    z.reset(6);
    RngStream rng(53);
    double bound = 1.0 / (1.0 - gamma * lambda) + 1.0;
    for (int seg = 0; seg < 5000; ++seg) {
        std::vector<double> phi(3);
        for (auto& x : phi) x = rng.uniform(-1.0, 1.0);
        int o = static_cast<int>(rng.uniform_int(2));
        int k = 1 + static_cast<int>(rng.uniform_int(5));
        apply_update(w, z, rng.uniform(-0.5, 0.5), o, k, phi, cfg, nullptr);
        CHECK(z.inf_norm() <= bound);
    }
}

TEST_CASE("non-finite TD errors are rejected") {
    LearnerConfig cfg;
    QWeights w(2, 2);
    TraceVector z;
    z.reset(4);
    std::vector<double> phi = {1.0, 0.0};
    CHECK_THROWS_AS(apply_update(w, z, std::nan(""), 0, 1, phi, cfg, nullptr),
                    NumericalError);
    CHECK_THROWS_AS(
        apply_update(w, z, std::numeric_limits<double>::infinity(), 0, 1, phi, cfg, nullptr),
        NumericalError);
}

TEST_CASE("greedy selection ties resolve to the lowest id") {
    QWeights w(5, 2);
    std::vector<double> phi = {1.0, 0.0};
    RngStream rng(59);
    // all zero: expect id 0 among {0,2,4}
    CHECK(select_option(w, phi, {0, 2, 4}, 0.0, rng) == 0);
    w.block(2)[0] = 0.5;
    CHECK(select_option(w, phi, {0, 2, 4}, 0.0, rng) == 2);
    w.block(4)[0] = 0.5;  // tie between 2 and 4
    CHECK(select_option(w, phi, {0, 2, 4}, 0.0, rng) == 2);
    // restricted candidate set ignores better outside options
    w.block(1)[0] = 9.0;
    CHECK(select_option(w, phi, {0, 2, 4}, 0.0, rng) == 2);
}

TEST_CASE("full exploration is uniform over the candidate set") {
    QWeights w(7, 1);
    for (int o = 0; o < 7; ++o) w.block(o)[0] = o;  // greedy would always pick 6
    std::vector<double> phi = {1.0};
    std::vector<int> ids = {0, 1, 2, 3, 4, 5, 6};
    RngStream rng(61);
    std::vector<int> counts(7, 0);
    const int n = 7000;
    for (int i = 0; i < n; ++i) counts[select_option(w, phi, ids, 1.0, rng)] += 1;
    double chi2 = 0.0;
    for (int c : counts) {
        double e = n / 7.0;
        chi2 += (c - e) * (c - e) / e;
    }
    CHECK(chi2 <= 16.81);  // chi-square 0.01 critical value, 6 dof
}

TEST_CASE("per-step epsilon decay follows its closed form") {
    EnvConfig ec = EnvConfig::defaults(Game::MiniPong);
    ec.seed = 15;
    ec.points_to_win = 100;  // avoid episode resets of epsilon bookkeeping
    MiniGameEnv env(ec);
    FourierBasis feat(1, 8, 16);
    auto opts = compile_options(default_manifest(Game::MiniPong), ec);
    QWeights w(static_cast<int>(opts.size()), feat.feature_count());
    LearnerConfig cfg;
    cfg.epsilon_decay = 1e-5;
    cfg.epsilon_min = 0.0;
    LearnerState ls(cfg);
    RngStream rng(63);
    long long steps = 0;
    while (steps < 100000) {
        EpisodeStats st = run_episode_sorso(env, opts, feat, w, cfg, ls, rng);
        steps += st.env_steps;
    }
    double expect = std::pow(1.0 - 1e-5, static_cast<double>(steps));
    CHECK(std::abs(ls.epsilon - expect) / expect <= 1e-9);
    // decay ticks once per env step; per-episode or per-point ticking would
    // leave epsilon near 1 after this many steps
    CHECK(ls.epsilon < 0.5);
}

TEST_CASE("degenerate options reproduce flat SARSA bit-for-bit") {
    EnvConfig ec = EnvConfig::defaults(Game::MiniPong);
    ec.seed = 77;
    FourierBasis feat(2, 8, 64);
    LearnerConfig cfg;
    cfg.alpha = 1e-4;

    MiniGameEnv env_a(ec);
    auto prim = primitive_options(ec);
    QWeights w_a(static_cast<int>(prim.size()), feat.feature_count());
    LearnerState ls_a(cfg);
    RngStream rng_a(101);

    MiniGameEnv env_b(ec);
    FlatGameEnv flat(env_b);
    QWeights w_b(ec.action_count(), feat.feature_count());
    LearnerState ls_b(cfg);
    RngStream rng_b(101);

    for (int ep = 0; ep < 5; ++ep) {
        auto sa = run_episode_sorso(env_a, prim, feat, w_a, cfg, ls_a, rng_a);
        auto sb = run_episode_sarsa(flat, feat, w_b, cfg, ls_b, rng_b);
        REQUIRE(sa.env_steps == sb.env_steps);
        REQUIRE(sa.undiscounted_return == sb.undiscounted_return);
    }
    REQUIRE(ls_a.epsilon == ls_b.epsilon);
    double worst = 0.0;
    for (std::size_t i = 0; i < w_a.w.size(); ++i)
        worst = std::max(worst, std::abs(w_a.w[i] - w_b.w[i]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("off-policy bootstrap takes the candidate maximum") {
    QWeights w(4, 2);
    w.block(0)[0] = 0.3;
    w.block(1)[0] = -2.0;
    w.block(2)[0] = 1.5;
    w.block(3)[0] = 5.0;
    std::vector<double> phi = {1.0, 0.0};
    CHECK(max_q(w, phi, {0, 1, 2}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(max_q(w, phi, {1}) == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK_THROWS_AS(max_q(w, phi, {}), UsageError);
}

TEST_CASE("q-learning episodes bootstrap at least at the on-policy value") {
    // With full exploration the chosen next option is rarely the argmax, so
    // the off-policy bootstrap must weakly dominate the next option's value.
    EnvConfig ec = EnvConfig::defaults(Game::MiniPong);
    ec.seed = 33;
    FourierBasis feat(2, 8, 64);
    auto opts = compile_options(default_manifest(Game::MiniPong), ec);
    LearnerConfig cfg;
    cfg.rule = UpdateRule::QLearning;
    cfg.alpha = 1e-4;
    cfg.epsilon_min = 1.0;  // stay fully exploratory
    MiniGameEnv env(ec);
    QWeights w(static_cast<int>(opts.size()), feat.feature_count());
    LearnerState ls(cfg);
    RngStream rng(67);

    MiniGameEnv env_s(ec);
    LearnerConfig scfg = cfg;
    scfg.rule = UpdateRule::Sarsa;
    QWeights ws(static_cast<int>(opts.size()), feat.feature_count());
    LearnerState lss(scfg);
    RngStream rngs(67);

    EpisodeLog log, slog;
    run_episode_sorso(env, opts, feat, w, cfg, ls, rng, nullptr, &log);
    run_episode_sorso(env_s, opts, feat, ws, scfg, lss, rngs, nullptr, &slog);
    REQUIRE(log.segments.size() >= 2);
    // identical rng + full exploration: both runs walk the same option path
    // until weight updates diverge the values; compare the very first segment,
    // whose inputs are still identical.
    CHECK(log.segments[0].q_boot >= slog.segments[0].q_boot - 1e-12);
}

TEST_CASE("weight checkpoints round-trip bit-exactly") {
    QWeights w(3, 5);
    RngStream rng(71);
    for (auto& x : w.w) x = rng.uniform(-2.0, 2.0);
    std::string path = "/tmp/sorso_test_qw.txt";
    save_qweights(w, "minipong", path);
    LoadedWeights back = load_qweights(path);
    CHECK(back.game == "minipong");
    REQUIRE(back.weights.option_count == 3);
    REQUIRE(back.weights.feature_len == 5);
    for (std::size_t i = 0; i < w.w.size(); ++i) CHECK(back.weights.w[i] == w.w[i]);
    std::remove(path.c_str());
}

TEST_CASE("episode log reconstructs the update from raw rewards") {
    EnvConfig ec = EnvConfig::defaults(Game::MiniPong);
    ec.seed = 3;
    FourierBasis feat(2, 8, 64);
    auto opts = compile_options(default_manifest(Game::MiniPong), ec);
    LearnerConfig cfg;
    MiniGameEnv env(ec);
    QWeights w(static_cast<int>(opts.size()), feat.feature_count());
    LearnerState ls(cfg);
    RngStream rng(73);
    EpisodeLog log;
    run_episode_sorso(env, opts, feat, w, cfg, ls, rng, nullptr, &log);
    REQUIRE(!log.segments.empty());
    for (const auto& seg : log.segments) {
        REQUIRE(static_cast<int>(seg.rewards.size()) == seg.length);
        double R = 0.0;
        for (int i = 0; i < seg.length; ++i) R += std::pow(cfg.gamma, i) * seg.rewards[i];
        CHECK(std::abs(R - seg.reward_sum) <= 1e-12);
        double want = seg.terminal
                          ? R - seg.q_start
                          : R + std::pow(cfg.gamma, seg.length) * seg.q_boot - seg.q_start;
        CHECK(std::abs(seg.delta - want) <= 1e-12);
    }
}
