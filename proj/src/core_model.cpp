#include "tacnog/core_model.hpp"

#include <cmath>

#include "tacnog/errors.hpp"

namespace tacnog {

double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

EngagementState EngagementState::make(double x, double y, double theta) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
        throw InvalidScenario("engagement state has non-finite components");
    return {x, y, wrap_angle(theta)};
}

void DimensionalScenario::validate() const {
    if (!(speed > 0.0)) throw InvalidScenario("speed must be positive");
    if (!(impact_time > 0.0)) throw InvalidScenario("impact time must be positive");
    if (!(a_max > 0.0)) throw InvalidScenario("acceleration bound must be positive");
    if (!std::isfinite(speed) || !std::isfinite(impact_time) || !std::isfinite(impact_angle) ||
        !std::isfinite(target.x) || !std::isfinite(target.y))
        throw InvalidScenario("scenario has non-finite fields");
    EngagementState::make(pursuer0.x, pursuer0.y, pursuer0.theta);
}

EngagementState rotate_state(const EngagementState& s, double psi) {
    const double c = std::cos(psi);
    const double sn = std::sin(psi);
    return {s.x * c - s.y * sn, s.x * sn + s.y * c, wrap_angle(s.theta + psi)};
}

EngagementState FrameTransform::to_canonical(const EngagementState& s) const {
    const EngagementState shifted{s.x - translation.x, s.y - translation.y, s.theta};
    EngagementState r = rotate_state(shifted, psi);
    r.x /= speed;
    r.y /= speed;
    return r;
}

EngagementState FrameTransform::to_dimensional(const EngagementState& s) const {
    const EngagementState scaled{s.x * speed, s.y * speed, s.theta};
    EngagementState r = rotate_state(scaled, -psi);
    r.x += translation.x;
    r.y += translation.y;
    return r;
}

CanonicalScenario canonicalize(const DimensionalScenario& sc) {
    sc.validate();
    FrameTransform tf{sc.target, wrap_angle(kCanonicalFinalHeading - sc.impact_angle), sc.speed};
    return {tf.to_canonical(sc.pursuer0), sc.impact_time, tf};
}

DimensionalScenario decanonicalize(const CanonicalScenario& c, double a_max) {
    DimensionalScenario sc;
    sc.pursuer0 = c.transform.to_dimensional(c.pursuer0);
    sc.target = c.transform.translation;
    sc.speed = c.transform.speed;
    sc.impact_time = c.horizon;
    sc.impact_angle = wrap_angle(kCanonicalFinalHeading - c.transform.psi);
    sc.a_max = a_max;
    return sc;
}

}  // namespace tacnog
