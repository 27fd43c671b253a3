// Command-line front end: pretrain paddle dynamics, train hier/flat agents,
// evaluate checkpoints greedily, compare learning curves, dump plot data.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sorso/dynamics.hpp"
#include "sorso/errors.hpp"
#include "sorso/harness.hpp"
#include "sorso/kv.hpp"
#include "sorso/learner.hpp"
#include "sorso/manifest.hpp"
#include "sorso/options.hpp"

namespace fs = std::filesystem;
using namespace sorso;

namespace {

// eval_seed<N>.csv (or train_seed<N>.csv) files in dir, ordered by seed.
std::vector<std::pair<std::uint64_t, std::string>> curve_files(const std::string& dir,
                                                               const std::string& prefix) {
    std::vector<std::pair<std::uint64_t, std::string>> out;
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    for (const auto& ent : fs::directory_iterator(dir)) {
        if (!ent.is_regular_file()) continue;
        std::string name = ent.path().filename().string();
        if (name.rfind(prefix, 0) != 0 || name.size() <= prefix.size() + 4) continue;
        if (name.substr(name.size() - 4) != ".csv") continue;
        std::string mid = name.substr(prefix.size(), name.size() - prefix.size() - 4);
        if (mid.empty() || mid.find_first_not_of("0123456789") != std::string::npos) continue;
        out.emplace_back(std::stoull(mid), ent.path().string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_pretrain(const std::string& config_path, const std::string& out_path) {
    ExperimentConfig cfg = load_config(config_path);
    auto data = collect_samples(cfg.env, cfg.pretrain_samples, cfg.seeds.front());
    DynamicsModel model = train_dynamics(data, cfg.env, cfg.ridge);
    save_dynamics(model, out_path);
    std::printf("collected %zu unique samples (%s)\n", data.size(),
                MiniGameEnv::game_name(cfg.env.game));
    for (int a = 0; a < model.action_count; ++a)
        std::printf("  %-5s train MAE %.3g\n", action_name(a), model.train_mae[a]);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& mode,
              const std::string& out_dir) {
    ExperimentConfig cfg = load_config(config_path);
    if (!mode.empty()) cfg.mode = mode;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    ExperimentResult res = run_experiment(cfg);
    for (const auto& run : res.runs) {
        double final_train = run.train.points.empty() ? 0.0 : run.train.points.back().ma10;
        std::printf("seed %llu: %lld steps, %zu episodes, final train ma10 %.4f",
                    static_cast<unsigned long long>(run.seed), run.total_steps,
                    run.train.points.size(), final_train);
        if (!run.eval.points.empty())
            std::printf(", final eval ma10 %.4f", run.eval.points.back().ma10);
        std::printf("\n");
    }
    std::printf("outputs in %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint,
             const std::string& mode, int points) {
    ExperimentConfig cfg = load_config(config_path);
    if (!mode.empty()) cfg.mode = mode;
    LoadedWeights lw = load_qweights(checkpoint);
    if (lw.game != MiniGameEnv::game_name(cfg.env.game))
        throw ConfigError("checkpoint game `" + lw.game + "` does not match config");

    EnvConfig ec = cfg.env;
    ec.seed = mix_seed(cfg.seeds.front(), 999);
    MiniGameEnv env(ec);
    FourierBasis basis(cfg.fourier_order, 8, cfg.max_features);
    InstructionManifest manifest = cfg.manifest_path.empty() ? default_manifest(ec.game)
                                                             : load_manifest(cfg.manifest_path);
    std::vector<TemporalOption> options =
        cfg.mode == "hier" ? compile_options(manifest, ec) : primitive_options(ec);
    if (static_cast<int>(options.size()) != lw.weights.option_count)
        throw ConfigError("checkpoint has " + std::to_string(lw.weights.option_count) +
                          " option blocks, expected " + std::to_string(options.size()) +
                          " for mode " + cfg.mode);
    if (basis.feature_count() != lw.weights.feature_len)
        throw ConfigError("checkpoint feature length " +
                          std::to_string(lw.weights.feature_len) + " does not match basis (" +
                          std::to_string(basis.feature_count()) + ")");

    DynamicsModel dyn;
    bool have_dyn = false;
    if (!cfg.dynamics_path.empty()) {
        dyn = load_dynamics(cfg.dynamics_path);
        if (dyn.game != ec.game) throw ConfigError("dynamics model game does not match config");
        have_dyn = true;
    }
    RngStream rng(mix_seed(cfg.seeds.front(), 998));
    int n = points > 0 ? points : cfg.eval_points;
    double rate = play_points_greedy(env, options, basis, lw.weights, n,
                                     have_dyn ? &dyn : nullptr, rng);
    std::printf("greedy win rate over %d points: %.4f\n", n, rate);
    return 0;
}

int cmd_compare(const std::string& hier_dir, const std::string& flat_dir, double threshold,
                const std::string& out_path) {
    auto make_rows = [&](const std::string& dir) {
        std::vector<CompareSeedRow> rows;
        for (const auto& [seed, path] : curve_files(dir, "eval_seed"))
            rows.push_back(curve_threshold_row(seed, read_curve_csv(path), threshold));
        if (rows.empty()) throw ConfigError("no eval_seed*.csv files in " + dir);
        return rows;
    };
    CompareReport rep = compare_curves(make_rows(hier_dir), make_rows(flat_dir), threshold);
    std::fputs(rep.text.c_str(), stdout);
    if (!out_path.empty()) {
        std::ofstream outf(out_path, std::ios::binary);
        if (!outf) throw ConfigError("cannot write " + out_path);
        outf << rep.csv;
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

// Gnuplot-friendly blocks: `steps ma10` per seed, blank-line separated.
int cmd_plot_data(const std::string& in_dir, const std::string& out_path) {
    auto files = curve_files(in_dir, "eval_seed");
    if (files.empty()) files = curve_files(in_dir, "train_seed");
    if (files.empty()) throw ConfigError("no eval_seed*.csv or train_seed*.csv in " + in_dir);
    std::ofstream outf(out_path, std::ios::binary);
    if (!outf) throw ConfigError("cannot write " + out_path);
    bool first = true;
    for (const auto& [seed, path] : files) {
        if (!first) outf << "\n";
        first = false;
        outf << "# seed " << seed << "\n";
        for (const auto& p : read_curve_csv(path).points)
            outf << p.steps << " " << format_real(p.ma10) << "\n";
    }
    std::printf("wrote %s (%zu seeds)\n", out_path.c_str(), files.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Instruction-derived temporal options and semi-MDP learning in mini ball games"};
    app.require_subcommand(1);

    std::string config_path, out_path, mode, checkpoint, hier_dir, flat_dir, in_dir;
    int points = 0;
    double threshold = 0.9;

    auto* pre = app.add_subcommand("pretrain", "Fit the paddle dynamics model");
    pre->add_option("--config", config_path, "experiment config file")->required();
    pre->add_option("--out", out_path, "output model path")->required();

    auto* tr = app.add_subcommand("train", "Train an agent and write learning curves");
    tr->add_option("--config", config_path, "experiment config file")->required();
    tr->add_option("--mode", mode, "override config mode (hier|flat)")
        ->check(CLI::IsMember({"hier", "flat"}));
    tr->add_option("--out", out_path, "override output directory");

    auto* ev = app.add_subcommand("eval", "Greedy win rate of a saved checkpoint");
    ev->add_option("--config", config_path, "experiment config file")->required();
    ev->add_option("--checkpoint", checkpoint, "weights file")->required();
    ev->add_option("--mode", mode, "override config mode (hier|flat)")
        ->check(CLI::IsMember({"hier", "flat"}));
    ev->add_option("--points", points, "points to play (default: config eval_points)");

    auto* cp = app.add_subcommand("compare", "Steps-to-threshold comparison of two runs");
    cp->add_option("--hier", hier_dir, "hierarchical run output dir")->required();
    cp->add_option("--flat", flat_dir, "flat run output dir")->required();
    cp->add_option("--threshold", threshold, "ma10 win-rate threshold (default 0.9)");
    cp->add_option("--out", out_path, "write per-seed CSV here");

    auto* pd = app.add_subcommand("plot-data", "Dump curves as gnuplot blocks");
    pd->add_option("--in", in_dir, "run output dir")->required();
    pd->add_option("--out", out_path, "output path")->required();

    try {
        app.parse(argc, argv);
        if (pre->parsed()) return cmd_pretrain(config_path, out_path);
        if (tr->parsed()) return cmd_train(config_path, mode, out_path);
        if (ev->parsed()) return cmd_eval(config_path, checkpoint, mode, points);
        if (cp->parsed()) return cmd_compare(hier_dir, flat_dir, threshold, out_path);
        if (pd->parsed()) return cmd_plot_data(in_dir, out_path);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 2;
    }
}
