#include "sorso/options.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sorso/errors.hpp"
#include "sorso/intercept.hpp"

namespace sorso {

namespace {

constexpr double kNetX = 0.5;

bool is_scoring(EventKind k) {
    return k == EventKind::AgentScored || k == EventKind::OpponentScored ||
           k == EventKind::EpisodeEnd;
}

}  // namespace

std::vector<TemporalOption> compile_options(const InstructionManifest& m, const EnvConfig& cfg) {
    if (m.game != cfg.game)
        throw ConfigError("compile_options: manifest game does not match the env config");
    double half = cfg.half_contact();
    std::vector<TemporalOption> out;
    auto add_hit = [&](double dx, double gy) {
        TemporalOption o;
        o.id = static_cast<int>(out.size());
        o.kind = OptionKind::Hit;
        o.delta_x = dx;
        o.delta_y = gy * half;
        out.push_back(o);
    };
    if (cfg.game == Game::MiniPong) {
        for (double gy : m.hit_grid_y) add_hit(0.0, gy);
    } else {
        for (double gx : m.hit_grid_x)
            for (double gy : m.hit_grid_y) add_hit(gx, gy);
    }
    TemporalOption w;
    w.id = static_cast<int>(out.size());
    w.kind = OptionKind::Wait;
    w.wait_noop = m.wait_noop;
    w.wait_target = m.wait_target;
    w.wait_interrupt = m.wait_interrupt;
    out.push_back(w);
    return out;
}

std::vector<TemporalOption> primitive_options(const EnvConfig& cfg) {
    std::vector<TemporalOption> out;
    for (int a = 0; a < cfg.action_count(); ++a) {
        TemporalOption o;
        o.id = a;
        o.kind = OptionKind::Primitive;
        o.primitive = static_cast<Action>(a);
        out.push_back(o);
    }
    return out;
}

InterceptPrediction predict_intercept(const Vec2& ball_pos, const Vec2& ball_vel, double plane,
                                      double lateral_lo, double lateral_hi) {
    InterceptCore core = intercept_at_plane(ball_pos.x, ball_pos.y, ball_vel.x, ball_vel.y,
                                            plane, lateral_lo, lateral_hi);
    return {plane, core.lateral, core.steps};
}

HitPlan plan_hit_target(const TemporalOption& opt, const GameState& s, const EnvConfig& cfg) {
    if (opt.kind != OptionKind::Hit) throw UsageError("plan_hit_target: not a Hit option");
    if (!(s.ball_vel.x > 0.0))
        throw UsageError("plan_hit_target: ball is not moving toward the agent");
    HitPlan plan;
    double plane;
    if (cfg.game == Game::MiniPong) {
        plane = s.agent_pos.x;  // fixed paddle plane
    } else {
        double want = kNetX + opt.delta_x;
        // Reachable planes: ahead of the ball, on the agent side, before the
        // flight's landing plane.
        double lo = std::max(kNetX, s.ball_pos.x);
        double hi = s.flight_land_x;
        plane = std::min(std::max(want, lo), std::max(hi, lo));
        plan.fell_back = std::abs(plane - want) > 1e-12;
    }
    InterceptPrediction p = predict_intercept(s.ball_pos, s.ball_vel, plane);
    plan.racket_center = {plane, p.lateral - opt.delta_y};
    return plan;
}

bool option_initiable(const TemporalOption& opt, const GameState& s, EventKind last_event) {
    switch (opt.kind) {
        case OptionKind::Primitive:
            return true;
        case OptionKind::Hit:
            return s.phase == Phase::BallTowardAgent || s.phase == Phase::Serve;
        case OptionKind::Wait:
            return s.phase == Phase::BallTowardOpponent || last_event == EventKind::AgentHit;
    }
    return false;
}

bool option_terminates(const TemporalOption& opt, const StepEvent& ev, const GameState& s,
                       const EnvConfig& cfg) {
    if (opt.kind == OptionKind::Primitive) return true;
    if (is_scoring(ev.kind)) return true;  // segments never span points
    if (opt.kind == OptionKind::Hit) return ev.kind == EventKind::AgentHit;
    // Wait
    if (opt.wait_interrupt) return ev.kind == EventKind::OpponentHit;
    if (!opt.wait_noop) {
        double dead = 0.5 * cfg.paddle_step;
        bool there = std::abs(opt.wait_target.y - s.agent_pos.y) <= dead &&
                     (cfg.game == Game::MiniPong ||
                      std::abs(opt.wait_target.x - s.agent_pos.x) <= dead);
        if (there) return true;
    }
    return false;
}

Action move_toward(const Vec2& target, const GameState& s, const EnvConfig& cfg,
                   const ControlContext& ctl) {
    double dead = 0.5 * cfg.paddle_step;
    double ey = target.y - s.agent_pos.y;
    if (ctl.dynamics != nullptr && cfg.game == Game::MiniPong) {
        const DynamicsModel& m = *ctl.dynamics;
        int best = 0;
        double best_err = std::abs(predict_next(m, ctl.window, 0) - target.y);
        for (int a = 1; a < m.action_count; ++a) {
            double err = std::abs(predict_next(m, ctl.window, a) - target.y);
            if (err < best_err) {
                best = a;
                best_err = err;
            }
        }
        return static_cast<Action>(best);
    }
    if (std::abs(ey) > dead) return ey > 0 ? Action::Up : Action::Down;
    if (cfg.game == Game::MiniTennis) {
        double ex = target.x - s.agent_pos.x;
        if (std::abs(ex) > dead) return ex > 0 ? Action::Right : Action::Left;
    }
    return Action::NoOp;
}

Action intra_action(const TemporalOption& opt, const GameState& s, const EnvConfig& cfg,
                    const ControlContext& ctl) {
    switch (opt.kind) {
        case OptionKind::Primitive:
            return opt.primitive;
        case OptionKind::Wait:
            if (opt.wait_noop) return Action::NoOp;
            return move_toward(opt.wait_target, s, cfg, ctl);
        case OptionKind::Hit: {
            if (s.ball_vel.x > 0.0) {
                HitPlan plan = plan_hit_target(opt, s, cfg);
                return move_toward(plan.racket_center, s, cfg, ctl);
            }
            // Serve or outbound ball: pre-position against the ball's current
            // lateral coordinate at the option's plane.
            double plane = cfg.game == Game::MiniPong ? s.agent_pos.x : kNetX + opt.delta_x;
            Vec2 proxy{plane, s.ball_pos.y - opt.delta_y};
            return move_toward(proxy, s, cfg, ctl);
        }
    }
    return Action::NoOp;
}

}  // namespace sorso
