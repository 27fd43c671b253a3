#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sorso/errors.hpp"
#include "sorso/harness.hpp"

using namespace sorso;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("minimal config text yields the documented defaults") {
    ExperimentConfig cfg = parse_config_text("game = minitennis\n", "t");
    CHECK(cfg.env.game == Game::MiniTennis);
    CHECK(cfg.env.points_to_win == 12);
    CHECK(cfg.mode == "hier");
    CHECK(cfg.episodes == 2000);
    CHECK(cfg.learner.alpha == 5e-5);
    CHECK(cfg.learner.gamma == 0.99);
    CHECK(cfg.learner.lambda == 0.99);
    CHECK(cfg.learner.epsilon_decay == 2e-5);
    CHECK(cfg.fourier_order == 3);
    CHECK(cfg.max_features == 512);
    CHECK(cfg.pretrain_samples == 50000);
    REQUIRE(cfg.seeds.size() == 1);
    CHECK(cfg.seeds[0] == 1);
}

TEST_CASE("config rejects unknown keys and out-of-range values") {
    CHECK_THROWS_AS(parse_config_text("game = minipong\nwat = 3\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("game = minipong\ngamma = 1.5\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("game = minipong\ngamma = 1\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("game = minipong\nmode = fancy\n", "t"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("game = minipong\nepisodes = 0\n", "t"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text("game = minipong\nepsilon_start = 0.1\nepsilon_min = 0.5\n", "t"),
        ConfigError);
    try {
        parse_config_text("game = minipong\nwat = 3\n", "t");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("wat") != std::string::npos);
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("resolved config echo parses back to the same experiment") {
    std::string text =
        "game = minitennis\nmode = flat\nepisodes = 7\nseeds = 4, 9\n"
        "alpha = 0.0002\nupdate_rule = qlearning\nlr_scaling = on\n"
        "opponent_speed = 0.02\nmax_features = 128\n";
    ExperimentConfig cfg = parse_config_text(text, "t");
    ExperimentConfig back = parse_config_text(serialize_config(cfg), "echo");
    CHECK(serialize_config(back) == serialize_config(cfg));
    CHECK(back.mode == "flat");
    CHECK(back.learner.rule == UpdateRule::QLearning);
    CHECK(back.learner.lr_scaling);
    CHECK(back.env.opponent_speed == 0.02);
    CHECK(back.seeds == std::vector<std::uint64_t>{4, 9});
}

TEST_CASE("trailing moving average is partial from the start") {
    auto ma = moving_average({0.0, 10.0}, 10);
    REQUIRE(ma.size() == 2);
    CHECK(ma[0] == 0.0);
    CHECK(ma[1] == 5.0);

    std::vector<double> xs;
    for (int i = 1; i <= 20; ++i) xs.push_back(i);
    ma = moving_average(xs, 10);
    CHECK(ma[19] == doctest::Approx(15.5).epsilon(1e-15));
    CHECK(ma[9] == doctest::Approx(5.5).epsilon(1e-15));
    CHECK(ma[4] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("curve csv round-trips") {
    LearningCurve c;
    c.points = {{1, 100, 0.5, 0.5}, {2, 250, -1.25, -0.375}};
    std::string path = "/tmp/sorso_test_curve.csv";
    write_curve_csv(c, "return", path);
    LearningCurve back = read_curve_csv(path);
    REQUIRE(back.points.size() == 2);
    CHECK(back.points[1].episode == 2);
    CHECK(back.points[1].steps == 250);
    CHECK(back.points[1].value == -1.25);
    CHECK(back.points[1].ma10 == -0.375);
    fs::remove(path);
    CHECK_THROWS_AS(read_curve_csv(path), ConfigError);
}

TEST_CASE("experiments write curves, weights, and a resolved echo deterministically") {
    ExperimentConfig cfg = parse_config_text("game = minipong\n", "t");
    cfg.episodes = 6;
    cfg.eval_every = 3;
    cfg.eval_points = 4;
    cfg.seeds = {1, 2};
    cfg.fourier_order = 1;
    cfg.max_features = 32;
    cfg.output_dir = "/tmp/sorso_htest_a";
    fs::remove_all(cfg.output_dir);
    ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.runs.size() == 2);
    CHECK(res.runs[0].train.points.size() == 6);
    CHECK(res.runs[0].eval.points.size() == 2);
    for (const char* f : {"train_seed1.csv", "train_seed2.csv", "eval_seed1.csv",
                          "eval_seed2.csv", "weights_seed1.txt", "weights_seed2.txt",
                          "config.resolved"})
        CHECK(fs::exists(fs::path(cfg.output_dir) / f));

    ExperimentConfig cfg2 = cfg;
    cfg2.output_dir = "/tmp/sorso_htest_b";
    fs::remove_all(cfg2.output_dir);
    run_experiment(cfg2);
    for (const char* f : {"train_seed1.csv", "eval_seed2.csv", "weights_seed1.txt"})
        CHECK(slurp(fs::path(cfg.output_dir) / f) == slurp(fs::path(cfg2.output_dir) / f));

    // the resolved echo reproduces the experiment byte-for-byte
    ExperimentConfig echo =
        parse_config_text(slurp(fs::path(cfg.output_dir) / "config.resolved"), "echo");
    CHECK(serialize_config(echo) == serialize_config(cfg));

    fs::remove_all(cfg.output_dir);
    fs::remove_all(cfg2.output_dir);
}

TEST_CASE("step budgets cut training between episodes") {
    ExperimentConfig cfg = parse_config_text("game = minipong\n", "t");
    cfg.episodes = 50;
    cfg.eval_every = 0;
    cfg.seeds = {3};
    cfg.fourier_order = 1;
    cfg.max_features = 16;
    cfg.max_steps = 900;
    cfg.output_dir = "/tmp/sorso_htest_c";
    fs::remove_all(cfg.output_dir);
    ExperimentResult res = run_experiment(cfg);
    const auto& run = res.runs[0];
    CHECK(run.train.points.size() < 50);
    long long before_last =
        run.train.points.size() >= 2 ? run.train.points[run.train.points.size() - 2].steps : 0;
    CHECK(before_last < 900);
    CHECK(run.total_steps >= 900);
    fs::remove_all(cfg.output_dir);
}

TEST_CASE("threshold rows find the first sustained crossing point") {
    LearningCurve eval;
    eval.points = {{5, 1000, 0.4, 0.4},
                   {10, 2000, 0.95, 0.675},
                   {15, 3000, 0.9, 0.75},
                   {20, 4000, 1.0, 0.8125}};
    CompareSeedRow row = curve_threshold_row(7, eval, 0.75);
    CHECK(row.seed == 7);
    CHECK(row.reached);
    CHECK(row.steps == 3000);  // first ma10 >= 0.75
    CHECK(row.budget == 4000);
    CHECK(row.final_ma == 0.8125);

    CompareSeedRow miss = curve_threshold_row(8, eval, 0.9);
    CHECK_FALSE(miss.reached);
    CHECK(miss.budget == 4000);
}

TEST_CASE("comparing identical curves gives a unit ratio") {
    std::vector<CompareSeedRow> rows = {{1, true, 5000, 9000, 0.95},
                                        {2, true, 7000, 9000, 0.97}};
    CompareReport rep = compare_curves(rows, rows, 0.9);
    CHECK(rep.hier_reached);
    CHECK(rep.flat_reached);
    CHECK(rep.ratio == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_FALSE(rep.ratio_is_lower_bound);
    CHECK(rep.hier_median_steps == doctest::Approx(6000.0));
}

TEST_CASE("censored flat runs produce a budget-based lower bound") {
    std::vector<CompareSeedRow> hier = {{1, true, 1000, 20000, 0.95},
                                        {2, true, 2000, 20000, 0.99},
                                        {3, true, 3000, 20000, 0.92}};
    std::vector<CompareSeedRow> flat = {{1, false, 0, 20000, 0.2},
                                        {2, false, 0, 22000, 0.3},
                                        {3, false, 0, 21000, 0.1}};
    CompareReport rep = compare_curves(hier, flat, 0.9);
    CHECK(rep.hier_reached);
    CHECK_FALSE(rep.flat_reached);
    CHECK(rep.ratio_is_lower_bound);
    CHECK(rep.ratio == doctest::Approx(20000.0 / 2000.0).epsilon(1e-12));
    CHECK(rep.text.find("not reached") != std::string::npos);
    CHECK(rep.csv.find("flat,1,no") != std::string::npos);
}
