#include "sorso/intercept.hpp"

#include <cmath>
#include <string>

#include "sorso/errors.hpp"

namespace sorso {

double fold_interval(double raw, double lo, double hi) {
    double span = hi - lo;
    double u = std::fmod(raw - lo, 2.0 * span);
    if (u < 0.0) u += 2.0 * span;
    return lo + (u <= span ? u : 2.0 * span - u);
}

InterceptCore intercept_at_plane(double x, double y, double vx, double vy, double plane,
                                 double lo, double hi) {
    if (vx == 0.0) throw UsageError("intercept: ball has no velocity toward the plane");
    double sgn = vx > 0.0 ? 1.0 : -1.0;
    double dist = (plane - x) * sgn;
    if (dist < -kPlaneEps)
        throw UsageError("intercept: ball already past the plane at x=" + std::to_string(x));
    double q = (dist - kPlaneEps) / std::abs(vx);
    int steps = q <= 0.0 ? 0 : static_cast<int>(std::ceil(q));
    InterceptCore out;
    out.steps = steps;
    out.lateral = fold_interval(y + vy * static_cast<double>(steps), lo, hi);
    return out;
}

}  // namespace sorso
