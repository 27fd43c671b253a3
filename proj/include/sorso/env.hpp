#pragma once

#include <array>
#include <cstdint>

#include "sorso/rng.hpp"

namespace sorso {

enum class Game { MiniPong, MiniTennis };

// MiniPong uses NoOp/Up/Down; MiniTennis adds Left/Right (depth).
enum class Action : int { NoOp = 0, Up = 1, Down = 2, Left = 3, Right = 4 };

enum class Phase { BallTowardAgent, BallTowardOpponent, Serve };

enum class EventKind { None, AgentHit, OpponentHit, AgentScored, OpponentScored, EpisodeEnd };

struct StepEvent {
    EventKind kind = EventKind::None;
    // Hit/score events: ball lateral coordinate at the decisive plane; hits
    // also record the contact offset (ball_y - paddle_center_y).
    double ball_y = 0.0;
    double contact_offset = 0.0;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Score {
    int agent = 0;
    int opponent = 0;
};

// Court is [0,1]^2. The agent defends the x=1 side, the opponent x=0; the
// MiniTennis net sits at x=0.5. Lateral walls at y=0 and y=1 reflect the ball.
struct GameState {
    Vec2 agent_pos;
    Vec2 opponent_pos;
    Vec2 ball_pos;
    Vec2 ball_vel;  // court units per step; (0,0) while phase == Serve
    Phase phase = Phase::Serve;
    Score score;
    int step_index = 0;
    // Plane at which the current flight scores for the hitter if the defender
    // makes no contact first. MiniPong: the defender's paddle plane.
    // MiniTennis: net -/+ landing distance D = depth_base + depth_gain * x_hit.
    double flight_land_x = 0.5;
    int flight_age = 0;  // steps since this flight began (serve or hit)
};

struct EnvConfig {
    Game game = Game::MiniPong;
    double paddle_height = 0.125;
    double ball_height = 0.03125;
    double paddle_step = 0.02;       // agent per-step drive
    double paddle_momentum = 0.5;    // beta in v' = beta*v + step*dir + noise
    double paddle_noise_std = 0.004;
    double ball_speed = 0.025;       // |vx| for every flight
    double angle_gain = 1.0;         // kappa in vy_out = kappa*ball_speed*offset/half_contact
    double opponent_speed = 0.018;
    int opponent_reaction_lag = 4;
    int points_to_win = 5;
    double depth_base = 0.3;  // MiniTennis landing law
    double depth_gain = 0.6;
    int point_step_cap = 10000;
    std::uint64_t seed = 1;

    double half_contact() const { return 0.5 * (paddle_height + ball_height); }
    int action_count() const { return game == Game::MiniPong ? 3 : 5; }
    static EnvConfig defaults(Game g);
};

struct StepResult {
    GameState state;
    double reward = 0.0;
    bool done = false;
    StepEvent event;
};

class MiniGameEnv {
public:
    explicit MiniGameEnv(const EnvConfig& cfg);

    const EnvConfig& config() const { return cfg_; }
    const GameState& state() const { return state_; }
    bool done() const { return done_; }

    GameState reset();                    // new episode, rng stream continues
    GameState reset(std::uint64_t seed);  // new episode, reseeded

    // Test/diagnostic hook: overwrite the observable state. Internal paddle
    // velocity is zeroed; flight bookkeeping is read from the state fields.
    void load_state(const GameState& s);

    StepResult step(Action a);

    // Scripted opponent: waits out the reaction lag, then tracks the incoming
    // flight's landing-plane intercept (lateral axis first, dead-zone half a
    // paddle_step). Deterministic, draws nothing from the rng stream.
    Action opponent_action() const;

    static const char* game_name(Game g);

private:
    void setup_point();
    void launch_serve();
    void apply_agent_action(Action a);
    void apply_opponent_action(Action a);

    EnvConfig cfg_;
    RngStream rng_;
    GameState state_;
    Vec2 agent_vel_;
    int point_steps_ = 0;
    bool done_ = false;
};

// Normalized observation [agent_pos, opponent_pos, ball_pos, ball_vel] with
// velocities mapped by (v + v_max) / (2 v_max); MiniPong's fixed paddle-plane
// x components collapse to 0.5. Always within [0,1]^8.
std::array<double, 8> normalize_state(const GameState& s, const EnvConfig& cfg);

}  // namespace sorso
