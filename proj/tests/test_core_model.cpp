#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "tacnog/core_model.hpp"
#include "tacnog/errors.hpp"
#include "tacnog/extremal.hpp"
#include "tacnog/scenario_io.hpp"

using namespace tacnog;

namespace {

DimensionalScenario case_a() {
    DimensionalScenario sc;
    sc.pursuer0 = EngagementState::make(-10000.0, 1000.0, 60.0 * kDegToRad);
    sc.target = {500.0, 0.0};
    sc.speed = 250.0;
    sc.impact_time = 45.0;
    sc.impact_angle = 10.0 * kDegToRad;
    sc.a_max = 5.0 * kGravity;
    return sc;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("wrap_angle keeps (-pi, pi]") {
    CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
    CHECK(wrap_angle(237.4 * kDegToRad) == doctest::Approx(-122.6 * kDegToRad));
}

TEST_CASE("EngagementState rejects non-finite components") {
    CHECK_THROWS_AS(EngagementState::make(NAN, 0, 0), InvalidScenario);
    CHECK_THROWS_AS(EngagementState::make(0, INFINITY, 0), InvalidScenario);
    CHECK(EngagementState::make(0, 0, 2 * kPi).theta == doctest::Approx(0.0));
}

TEST_CASE("rotate_state examples") {
    const auto a = rotate_state(EngagementState::make(1, 0, 0), 0.0);
    CHECK(a.x == 1.0);
    CHECK(a.y == 0.0);
    CHECK(a.theta == 0.0);
    const auto b = rotate_state(EngagementState::make(1, 0, 0), kPi / 2);
    CHECK(b.x == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(b.y == doctest::Approx(1.0));
    CHECK(b.theta == doctest::Approx(kPi / 2));
}

TEST_CASE("rotation round trip and distance preservation") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> pos(-100, 100), ang(-10, 10);
    for (int i = 0; i < 100; ++i) {
        const auto s = EngagementState::make(pos(rng), pos(rng), ang(rng));
        const double psi = ang(rng);
        const auto r = rotate_state(s, psi);
        const auto back = rotate_state(r, -psi);
        CHECK(std::abs(back.x - s.x) < 1e-12 * 100);
        CHECK(std::abs(back.y - s.y) < 1e-12 * 100);
        CHECK(std::abs(oracle::angle_diff(back.theta, s.theta)) < 1e-12);
        CHECK(std::abs(std::hypot(r.x, r.y) - std::hypot(s.x, s.y)) < 1e-12 * std::hypot(s.x, s.y) + 1e-13);
    }
}

TEST_CASE("canonicalize: reference scenario is already canonical") {
    DimensionalScenario sc;
    sc.pursuer0 = EngagementState::make(0.4748, 1.5968, 237.4 * kDegToRad);
    sc.impact_time = 2.7;
    const CanonicalScenario c = canonicalize(sc);
    CHECK(c.transform.psi == doctest::Approx(0.0));
    CHECK(c.transform.speed == 1.0);
    CHECK(c.pursuer0.x == doctest::Approx(0.4748));
    CHECK(c.pursuer0.y == doctest::Approx(1.5968));
    CHECK(std::abs(c.pursuer0.theta - (-2.1400)) < 1e-3);
    CHECK(c.horizon == 2.7);
}

TEST_CASE("canonicalize: unit speed, origin target and -pi/2 impact is the identity") {
    DimensionalScenario sc;
    sc.pursuer0 = EngagementState::make(3.0, -2.0, 0.3);
    const auto c = canonicalize(sc);
    CHECK(c.pursuer0.x == doctest::Approx(3.0));
    CHECK(c.pursuer0.y == doctest::Approx(-2.0));
    CHECK(c.pursuer0.theta == doctest::Approx(0.3));
}

TEST_CASE("canonicalize round trip on Case A") {
    const auto sc = case_a();
    const auto c = canonicalize(sc);
    CHECK(std::abs(oracle::angle_diff(c.transform.to_canonical(EngagementState::make(500, 0, sc.impact_angle)).theta,
                                      -kPi / 2)) < 1e-12);
    const auto back = decanonicalize(c, sc.a_max);
    CHECK(rel(back.pursuer0.x, sc.pursuer0.x) < 1e-9);
    CHECK(rel(back.pursuer0.y, sc.pursuer0.y) < 1e-9);
    CHECK(std::abs(oracle::angle_diff(back.pursuer0.theta, sc.pursuer0.theta)) < 1e-9);
    CHECK(rel(back.target.x, sc.target.x) < 1e-9);
    CHECK(rel(back.target.y, sc.target.y) < 1e-9);
    CHECK(rel(back.speed, sc.speed) < 1e-9);
    CHECK(rel(back.impact_time, sc.impact_time) < 1e-9);
    CHECK(std::abs(oracle::angle_diff(back.impact_angle, sc.impact_angle)) < 1e-9);
    CHECK(back.a_max == sc.a_max);
}

TEST_CASE("canonical pursuer maps back to the dimensional pursuer") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(-5000, 5000), ang(-kPi, kPi), spd(10, 400);
    for (int i = 0; i < 50; ++i) {
        DimensionalScenario sc;
        sc.pursuer0 = EngagementState::make(pos(rng), pos(rng), ang(rng));
        sc.target = {pos(rng), pos(rng)};
        sc.speed = spd(rng);
        sc.impact_time = 30;
        sc.impact_angle = ang(rng);
        const auto c = canonicalize(sc);
        const auto d = c.transform.to_dimensional(c.pursuer0);
        CHECK(rel(d.x, sc.pursuer0.x) < 1e-12 * 10);
        CHECK(rel(d.y, sc.pursuer0.y) < 1e-12 * 10);
    }
}

TEST_CASE("invalid scenarios are rejected") {
    DimensionalScenario sc;
    sc.speed = 0.0;
    CHECK_THROWS_AS(canonicalize(sc), InvalidScenario);
    sc.speed = 1.0;
    sc.impact_time = -1.0;
    CHECK_THROWS_AS(canonicalize(sc), InvalidScenario);
    sc.impact_time = 1.0;
    sc.a_max = 0.0;
    CHECK_THROWS_AS(sc.validate(), InvalidScenario);
}

TEST_CASE("dimensionalize_control examples") {
    CHECK(dimensionalize_control(0.0, 250.0) == 0.0);
    CHECK(dimensionalize_control(0.5, 1.0) == 0.5);
    CHECK(canonicalize_control(dimensionalize_control(0.37, 250.0), 250.0) == doctest::Approx(0.37));
}

TEST_CASE("dimensional plant under V u~ retraces the V-scaled canonical path") {
    const double V = 250.0;
    auto u_c = [](double t) { return 0.3 * std::sin(2.0 * t) - 0.1; };
    const auto canon = forward_simulate(EngagementState::make(0.2, 1.0, -1.0), u_c, 3.0, 1e-3);
    const auto dim = oracle::dimensional_flow({0.2 * V, 1.0 * V, -1.0}, V, [&](double t) { return V * u_c(t); }, 3.0,
                                              3000);
    CHECK(std::abs(dim[0] - V * canon.terminal().x) < 1e-6 * V);
    CHECK(std::abs(dim[1] - V * canon.terminal().y) < 1e-6 * V);
    CHECK(std::abs(oracle::angle_diff(dim[2], canon.terminal().theta)) < 1e-9);
}

TEST_CASE("control invariance under rotation") {
    auto u = [](double t) { return std::cos(t) - 0.4; };
    const auto z0 = EngagementState::make(0.3, 0.9, 0.7);
    const double psi = 1.1;
    const auto a = forward_simulate(z0, u, 2.0, 1e-3);
    const auto b = forward_simulate(rotate_state(z0, psi), u, 2.0, 1e-3);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        const auto r = rotate_state(a.states[k], psi);
        worst = std::max({worst, std::abs(r.x - b.states[k].x), std::abs(r.y - b.states[k].y),
                          std::abs(oracle::angle_diff(r.theta, b.states[k].theta))});
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("scenario JSON round trip and defaults") {
    const auto sc = case_a();
    const auto j = scenario_to_json(sc);
    const auto back = scenario_from_json(j);
    CHECK(back.pursuer0.x == sc.pursuer0.x);
    CHECK(back.target.x == sc.target.x);
    CHECK(back.impact_angle == doctest::Approx(sc.impact_angle));
    CHECK(back.a_max == doctest::Approx(sc.a_max));

    auto k = j;
    k.erase("a_max_g");
    CHECK(std::isinf(scenario_from_json(k).a_max));
    k.erase("speed_mps");
    CHECK_THROWS_AS(scenario_from_json(k), Error);

    const auto path = std::filesystem::temp_directory_path() / "tacnog_scenario_test.json";
    save_scenario(path, sc);
    CHECK(load_scenario(path).impact_time == sc.impact_time);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_scenario("/nonexistent/dir/none.json"), IoError);
}
