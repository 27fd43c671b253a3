#include "sorso/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sorso/errors.hpp"
#include "sorso/intercept.hpp"

namespace sorso {

namespace {

constexpr double kNetX = 0.5;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

int dir_y(Action a) { return a == Action::Up ? 1 : (a == Action::Down ? -1 : 0); }
int dir_x(Action a) { return a == Action::Right ? 1 : (a == Action::Left ? -1 : 0); }

}  // namespace

EnvConfig EnvConfig::defaults(Game g) {
    EnvConfig c;
    c.game = g;
    if (g == Game::MiniTennis) c.points_to_win = 12;
    return c;
}

const char* MiniGameEnv::game_name(Game g) {
    return g == Game::MiniPong ? "minipong" : "minitennis";
}

MiniGameEnv::MiniGameEnv(const EnvConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (cfg.paddle_height <= 0 || cfg.ball_height <= 0 || cfg.paddle_step <= 0 ||
        cfg.ball_speed <= 0 || cfg.opponent_speed < 0 || cfg.points_to_win < 1 ||
        cfg.point_step_cap < 1 || cfg.paddle_noise_std < 0 || cfg.paddle_momentum < 0 ||
        cfg.paddle_momentum >= 1 || cfg.angle_gain < 0 || cfg.opponent_reaction_lag < 0)
        throw ConfigError("env: config value out of range");
    reset(cfg.seed);
}

GameState MiniGameEnv::reset() {
    state_ = GameState{};
    state_.agent_pos = {1.0, 0.5};
    state_.opponent_pos = {0.0, 0.5};
    agent_vel_ = {0.0, 0.0};
    done_ = false;
    setup_point();
    return state_;
}

GameState MiniGameEnv::reset(std::uint64_t seed) {
    rng_.reseed(seed);
    return reset();
}

void MiniGameEnv::load_state(const GameState& s) {
    state_ = s;
    agent_vel_ = {0.0, 0.0};
    point_steps_ = 0;
    done_ = s.score.agent >= cfg_.points_to_win || s.score.opponent >= cfg_.points_to_win;
}

void MiniGameEnv::setup_point() {
    state_.ball_pos = {0.5, 0.5};
    state_.ball_vel = {0.0, 0.0};
    state_.phase = Phase::Serve;
    state_.flight_land_x = 0.5;
    state_.flight_age = 0;
    point_steps_ = 0;
}

void MiniGameEnv::launch_serve() {
    bool toward_agent = ((state_.score.agent + state_.score.opponent) % 2) == 0;
    double frac = rng_.uniform(-0.8, 0.8);
    state_.ball_vel.x = toward_agent ? cfg_.ball_speed : -cfg_.ball_speed;
    state_.ball_vel.y = frac * cfg_.angle_gain * cfg_.ball_speed;
    // Serves land at the receiver's baseline in both games.
    state_.flight_land_x = toward_agent ? 1.0 : 0.0;
    state_.flight_age = 0;
    state_.phase = toward_agent ? Phase::BallTowardAgent : Phase::BallTowardOpponent;
}

void MiniGameEnv::apply_agent_action(Action a) {
    double beta = cfg_.paddle_momentum;
    double sigma = cfg_.paddle_noise_std;
    if (cfg_.game == Game::MiniTennis) {
        double nx = sigma > 0 ? rng_.normal(0.0, sigma) : 0.0;
        agent_vel_.x = beta * agent_vel_.x + cfg_.paddle_step * dir_x(a) + nx;
        double newx = clamp(state_.agent_pos.x + agent_vel_.x, kNetX, 1.0);
        agent_vel_.x = newx - state_.agent_pos.x;
        state_.agent_pos.x = newx;
    }
    double ny = sigma > 0 ? rng_.normal(0.0, sigma) : 0.0;
    agent_vel_.y = beta * agent_vel_.y + cfg_.paddle_step * dir_y(a) + ny;
    double newy = clamp(state_.agent_pos.y + agent_vel_.y, 0.0, 1.0);
    agent_vel_.y = newy - state_.agent_pos.y;
    state_.agent_pos.y = newy;
}

void MiniGameEnv::apply_opponent_action(Action a) {
    if (cfg_.game == Game::MiniTennis)
        state_.opponent_pos.x =
            clamp(state_.opponent_pos.x + cfg_.opponent_speed * dir_x(a), 0.0, kNetX);
    state_.opponent_pos.y =
        clamp(state_.opponent_pos.y + cfg_.opponent_speed * dir_y(a), 0.0, 1.0);
}

Action MiniGameEnv::opponent_action() const {
    const GameState& s = state_;
    if (s.phase != Phase::BallTowardOpponent) return Action::NoOp;
    if (s.flight_age < cfg_.opponent_reaction_lag) return Action::NoOp;
    InterceptCore t;
    try {
        t = intercept_at_plane(s.ball_pos.x, s.ball_pos.y, s.ball_vel.x, s.ball_vel.y,
                               s.flight_land_x, 0.0, 1.0);
    } catch (const UsageError&) {
        return Action::NoOp;
    }
    double dead = 0.5 * cfg_.paddle_step;
    double ey = t.lateral - s.opponent_pos.y;
    if (std::abs(ey) > dead) return ey > 0 ? Action::Up : Action::Down;
    if (cfg_.game == Game::MiniTennis) {
        double ex = s.flight_land_x - s.opponent_pos.x;
        if (std::abs(ex) > dead) return ex > 0 ? Action::Right : Action::Left;
    }
    return Action::NoOp;
}

StepResult MiniGameEnv::step(Action a) {
    if (done_) throw UsageError("step: episode already ended");
    if (static_cast<int>(a) < 0 || static_cast<int>(a) >= cfg_.action_count())
        throw UsageError("step: action " + std::to_string(static_cast<int>(a)) +
                         " not in this game's action set");

    GameState& s = state_;
    if (s.phase == Phase::Serve) launch_serve();

    apply_agent_action(a);
    apply_opponent_action(opponent_action());

    // Ball advance: straight in x, reflecting walls in y.
    Vec2 prev_ball = s.ball_pos;
    s.ball_pos.x += s.ball_vel.x;
    double raw_y = s.ball_pos.y + s.ball_vel.y;
    if (raw_y > 1.0) {
        s.ball_pos.y = 2.0 - raw_y;
        s.ball_vel.y = -s.ball_vel.y;
    } else if (raw_y < 0.0) {
        s.ball_pos.y = -raw_y;
        s.ball_vel.y = -s.ball_vel.y;
    } else {
        s.ball_pos.y = raw_y;
    }
    s.flight_age += 1;

    StepEvent ev;
    double reward = 0.0;
    bool scored = false;

    double dir = s.ball_vel.x > 0 ? 1.0 : -1.0;
    bool toward_agent = dir > 0;
    const Vec2& defender = toward_agent ? s.agent_pos : s.opponent_pos;
    double plane_in = defender.x - dir * kPlaneEps;
    bool crossed = toward_agent ? (prev_ball.x < plane_in && s.ball_pos.x >= plane_in)
                                : (prev_ball.x > plane_in && s.ball_pos.x <= plane_in);
    double half = cfg_.half_contact();

    if (crossed && std::abs(s.ball_pos.y - defender.y) <= half) {
        double offset = s.ball_pos.y - defender.y;
        ev.kind = toward_agent ? EventKind::AgentHit : EventKind::OpponentHit;
        ev.ball_y = s.ball_pos.y;
        ev.contact_offset = offset;
        s.ball_pos.x = defender.x;
        s.ball_vel.x = -dir * cfg_.ball_speed;
        s.ball_vel.y = cfg_.angle_gain * cfg_.ball_speed * offset / half;
        s.flight_age = 0;
        if (cfg_.game == Game::MiniPong) {
            s.flight_land_x = toward_agent ? 0.0 : 1.0;
        } else {
            double x_hit = std::abs(defender.x - kNetX);
            double depth = std::min(cfg_.depth_base + cfg_.depth_gain * x_hit, kNetX);
            s.flight_land_x = toward_agent ? kNetX - depth : kNetX + depth;
        }
        s.phase = toward_agent ? Phase::BallTowardOpponent : Phase::BallTowardAgent;
    } else {
        double land_in = s.flight_land_x - dir * kPlaneEps;
        bool landed = toward_agent ? s.ball_pos.x >= land_in : s.ball_pos.x <= land_in;
        if (landed) {
            scored = true;
            ev.ball_y = s.ball_pos.y;
            if (toward_agent) {
                ev.kind = EventKind::OpponentScored;
                reward = -1.0;
                s.score.opponent += 1;
                done_ = s.score.opponent >= cfg_.points_to_win;
            } else {
                ev.kind = EventKind::AgentScored;
                reward = 1.0;
                s.score.agent += 1;
                done_ = s.score.agent >= cfg_.points_to_win;
            }
            if (!done_) setup_point();
        }
    }

    s.step_index += 1;
    if (!scored) {
        point_steps_ += 1;
        if (point_steps_ > cfg_.point_step_cap)
            throw NumericalError("point exceeded the step cap of " +
                                 std::to_string(cfg_.point_step_cap));
    }

    return {s, reward, done_, ev};
}

std::array<double, 8> normalize_state(const GameState& s, const EnvConfig& cfg) {
    double vmax = cfg.ball_speed * std::max(1.0, cfg.angle_gain);
    std::array<double, 8> out{
        s.agent_pos.x,    s.agent_pos.y,
        s.opponent_pos.x, s.opponent_pos.y,
        s.ball_pos.x,     s.ball_pos.y,
        (s.ball_vel.x + vmax) / (2.0 * vmax),
        (s.ball_vel.y + vmax) / (2.0 * vmax),
    };
    if (cfg.game == Game::MiniPong) {
        out[0] = 0.5;
        out[2] = 0.5;
    }
    for (double& v : out) v = clamp(v, 0.0, 1.0);
    return out;
}

}  // namespace sorso
