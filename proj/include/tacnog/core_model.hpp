// Frames, units and normalization for planar constant-speed engagements.
//
// The canonical problem has the target at the origin, a final heading of
// -pi/2 and unit speed. Time is never rescaled by canonicalization, so a
// canonical control u~ and effort J~ relate to dimensional ones through
// u = V u~ and J = V^2 J~.
#pragma once

#include <limits>
#include <numbers>

namespace tacnog {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGravity = 9.8;  // [m/s^2]
inline constexpr double kCanonicalFinalHeading = -kPi / 2.0;
inline constexpr double kDegToRad = kPi / 180.0;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// Pursuer pose. Heading is measured counterclockwise from +x and kept in (-pi, pi].
struct EngagementState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    /// Builds a state with wrapped heading; throws InvalidScenario on non-finite input.
    static EngagementState make(double x, double y, double theta);
};

struct DimensionalScenario {
    EngagementState pursuer0;                                // [m, rad]
    Vec2 target;                                             // [m]
    double speed = 1.0;                                      // [m/s]
    double impact_time = 1.0;                                // [s]
    double impact_angle = kCanonicalFinalHeading;            // [rad]
    double a_max = std::numeric_limits<double>::infinity();  // [m/s^2]

    /// Throws InvalidScenario unless speed, impact_time and a_max are positive.
    void validate() const;
};

/// Translation + rotation + 1/V scaling between a dimensional frame and the canonical one.
struct FrameTransform {
    Vec2 translation;  // target position in the dimensional frame [m]
    double psi = 0.0;  // rotation applied after translation [rad]
    double speed = 1.0;

    EngagementState to_canonical(const EngagementState& s) const;
    EngagementState to_dimensional(const EngagementState& s) const;
};

struct CanonicalScenario {
    EngagementState pursuer0;
    double horizon = 1.0;
    FrameTransform transform;
};

EngagementState rotate_state(const EngagementState& s, double psi);

CanonicalScenario canonicalize(const DimensionalScenario& sc);

/// Inverse of canonicalize; a_max is not part of the canonical frame and is passed through.
DimensionalScenario decanonicalize(const CanonicalScenario& c,
                                   double a_max = std::numeric_limits<double>::infinity());

inline double dimensionalize_control(double u_canonical, double speed) { return speed * u_canonical; }
inline double canonicalize_control(double u, double speed) { return u / speed; }

}  // namespace tacnog
