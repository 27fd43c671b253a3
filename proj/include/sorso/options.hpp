#pragma once

#include <vector>

#include "sorso/dynamics.hpp"
#include "sorso/env.hpp"
#include "sorso/manifest.hpp"

namespace sorso {

enum class OptionKind { Hit, Wait, Primitive };

// A temporally extended option: Hit (intercept the incoming ball at a chosen
// plane with a chosen contact offset), Wait (hold a station or do nothing
// until the rally comes back), or Primitive (degenerate one-step option used
// to reduce the semi-MDP learner to the flat one).
struct TemporalOption {
    int id = 0;
    OptionKind kind = OptionKind::Hit;
    double delta_x = 0.0;  // Hit, MiniTennis: hit plane distance from the net, court units
    double delta_y = 0.0;  // Hit: desired contact offset, court units
    bool wait_noop = true;
    Vec2 wait_target;
    bool wait_interrupt = true;
    Action primitive = Action::NoOp;
};

// Hit options in x-major then y order, Wait last, ids dense from 0.
// MiniPong: |hit_grid_y| + 1, MiniTennis: |hit_grid_x| * |hit_grid_y| + 1.
std::vector<TemporalOption> compile_options(const InstructionManifest& m, const EnvConfig& cfg);

// One degenerate option per primitive action.
std::vector<TemporalOption> primitive_options(const EnvConfig& cfg);

struct InterceptPrediction {
    double plane = 0.0;
    double lateral = 0.0;
    int steps = 0;
};

// Where the current flight crosses `plane`, folding wall reflections.
// Throws UsageError when the ball is not moving toward the plane.
InterceptPrediction predict_intercept(const Vec2& ball_pos, const Vec2& ball_vel, double plane,
                                      double lateral_lo = 0.0, double lateral_hi = 1.0);

struct HitPlan {
    Vec2 racket_center;
    bool fell_back = false;  // requested plane unreachable, nearest used instead
};

// Racket-center target realizing the option's contact offset at its hit
// plane. Pre: Hit option, ball moving toward the agent.
HitPlan plan_hit_target(const TemporalOption& opt, const GameState& s, const EnvConfig& cfg);

bool option_initiable(const TemporalOption& opt, const GameState& s, EventKind last_event);
bool option_terminates(const TemporalOption& opt, const StepEvent& ev, const GameState& s,
                       const EnvConfig& cfg);

// Controller context: null dynamics = analytic bang-bang; a MiniPong dynamics
// model switches the lateral choice to one-step lookahead (the caller keeps
// the window fresh via push()).
struct ControlContext {
    const DynamicsModel* dynamics = nullptr;
    HistoryWindow window;
};

// Drives the agent paddle toward target: lateral axis first, dead-zone half a
// paddle_step; ties in the lookahead controller resolve to NoOp.
Action move_toward(const Vec2& target, const GameState& s, const EnvConfig& cfg,
                   const ControlContext& ctl);

// The option's primitive action for this step.
Action intra_action(const TemporalOption& opt, const GameState& s, const EnvConfig& cfg,
                    const ControlContext& ctl);

}  // namespace sorso
