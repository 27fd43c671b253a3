#pragma once

namespace sorso {

// Reflection fold into [lo, hi]: with span L, u = (raw - lo) mod 2L,
// result = lo + (u <= L ? u : 2L - u).
double fold_interval(double raw, double lo, double hi);

// Planes are tested with a small inset toward the incoming ball so that
// crossing decisions never sit exactly on config-grid-exact coordinates.
inline constexpr double kPlaneEps = 1e-9;

struct InterceptCore {
    int steps = 0;       // whole steps until the ball is at or past the inset plane
    double lateral = 0;  // folded lateral coordinate after that many steps
};

// Closed-form flight query: the ball moves (x,y) -> (x+vx, fold(y+vy)) per
// step; returns when and where it reaches `plane`. Throws UsageError when the
// ball is not moving toward the plane or is already past it by more than the
// inset.
InterceptCore intercept_at_plane(double x, double y, double vx, double vy, double plane,
                                 double lo, double hi);

}  // namespace sorso
