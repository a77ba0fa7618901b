#include <doctest.h>

#include "aerosurvey/baseline_bang.hpp"
#include "aerosurvey/nlp_planner.hpp"
#include "aerosurvey/validation_oracle.hpp"

#include <cmath>

using namespace aerosurvey;

namespace
{

PiecewiseTrajectory bang_bang_trajectory()
{
    PiecewiseTrajectory traj;
    PiecewiseTrajectory::Interval first;
    first.t_start = 0.0;
    first.t_end = 1.0;
    first.u = Vec3(10, 0, 0);
    PiecewiseTrajectory::Interval second;
    second.t_start = 1.0;
    second.t_end = 2.0;
    second.r_start = Vec3(5, 0, 0);
    second.v_start = Vec3(10, 0, 0);
    second.u = Vec3(-10, 0, 0);
    traj.intervals = {first, second};
    traj.waypoint_times = {0.0, 2.0};
    return traj;
}

} // namespace

TEST_CASE("zero input from rest stays stationary")
{
    const auto history = forward_integrate([](double) { return Vec3(Vec3::Zero()); },
                                           IntegrationState{}, 3.0, 0.1);
    REQUIRE(history.size() == 31);
    for (const IntegrationState &x : history)
    {
        CHECK(x.r.norm() == 0.0);
        CHECK(x.v.norm() == 0.0);
    }
}

TEST_CASE("bang-bang replay lands on the closed-form endpoint")
{
    const auto history = forward_integrate(bang_bang_trajectory(), 1e-3);
    const IntegrationState &last = history.back();
    CHECK(last.t == doctest::Approx(2.0));
    CHECK(std::abs(last.r.x() - 10.0) <= 1e-9);
    CHECK(std::abs(last.v.x()) <= 1e-9);
    CHECK(last.r.tail<2>().norm() == 0.0);
}

TEST_CASE("halving the step shrinks the endpoint error at fourth order")
{
    // Smooth forcing with a closed-form answer: u = (cos t, sin 2t, 1).
    auto u = [](double t) { return Vec3(std::cos(t), std::sin(2.0 * t), 1.0); };
    const double T = 2.0;
    const Vec3 r_exact(1.0 - std::cos(T),
                       0.5 * T - 0.25 * std::sin(2.0 * T),
                       0.5 * T * T);

    auto endpoint_error = [&](double step) {
        const auto history = forward_integrate(u, IntegrationState{}, T, step);
        return (history.back().r - r_exact).norm();
    };

    const double coarse = endpoint_error(0.2);
    const double fine = endpoint_error(0.1);
    CHECK(coarse > 0.0);
    CHECK(coarse / fine >= 8.0);
}

TEST_CASE("analytic one-axis oracle closed forms")
{
    CHECK(analytic_min_time_1d(10.0, 10.0, kInf) == doctest::Approx(2.0));
    CHECK(analytic_min_time_1d(100.0, 10.0, 10.0) == doctest::Approx(11.0));
    CHECK(analytic_min_time_1d(0.0, 5.0, 3.0) == 0.0);
    CHECK_THROWS_AS(analytic_min_time_1d(-1.0, 5.0, 3.0), InvalidParameterError);
}

TEST_CASE("brute force matches the analytic oracle on an uncapped dash")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;
    params.v_axis_max = 12.0; // above the 10 m/s peak, so inactive

    const BruteForceResult bf = brute_force_min_time(plan, params);
    CHECK(std::abs(bf.total_time - 2.0) <= bf.resolution_s);
    CHECK(bf.resolution_s < 0.2);
}

TEST_CASE("degenerate zero-distance plan costs nothing")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(1, 2, 3), Vec3(1, 2, 3)};
    plan.allow_coincident = true;
    PlannerParams params;
    params.u_max = 5.0;
    params.v_axis_max = 4.0;

    const BruteForceResult bf = brute_force_min_time(plan, params, 5, 5);
    CHECK(bf.total_time == 0.0);
}

TEST_CASE("capture-speed cap makes the three-waypoint search strictly slower")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(20, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;
    params.v_axis_max = 12.0;

    const BruteForceResult uncapped = brute_force_min_time(plan, params, 11, 11);
    params.v_blur = 2.0;
    const BruteForceResult capped = brute_force_min_time(plan, params, 11, 11);
    CHECK(capped.total_time > uncapped.total_time + 0.1);
}

TEST_CASE("optimizer stays within a grid cell of the brute-force optimum")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(8, 3, 0), Vec3(12, 9, 0)};
    PlannerParams params;
    params.u_max = 6.0;
    params.v_axis_max = 7.0;
    params.v_blur = 4.0;

    const BruteForceResult bf = brute_force_min_time(plan, params, 13, 13);
    const NodeSolution sol = plan_min_time(plan, params);
    CHECK(sol.total_time >= bf.total_time - bf.resolution_s);
    CHECK(sol.total_time <= bf.total_time * 1.05);
}

TEST_CASE("audit passes a converged minimum-time solve")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;

    const NodeSolution sol = plan_min_time(plan, params);
    const PiecewiseTrajectory traj = interpolate(sol, plan, params);
    const AuditReport report = audit(traj, plan, params);
    CHECK(report.passed);
    CHECK(report.failures.empty());
    CHECK(report.max_waypoint_error <= 1e-6);
    CHECK(report.reintegration_gap <= 1e-6);
    CHECK(report.total_time == doctest::Approx(sol.total_time));
}

TEST_CASE("audit flags the offending waypoint when the capture speed is high")
{
    // Constant 5.1 m/s cruise against a 5 m/s blur bound, built directly so
    // the checker sees raw trajectory data only.
    PiecewiseTrajectory traj;
    PiecewiseTrajectory::Interval iv;
    iv.t_start = 0.0;
    iv.t_end = 2.0;
    iv.v_start = Vec3(5.1, 0, 0);
    traj.intervals = {iv};
    traj.waypoint_times = {0.0, 2.0};

    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10.2, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;
    params.v_blur = 5.0;
    params.v_start = Vec3(5.1, 0, 0);
    params.v_end = Vec3(5.1, 0, 0);

    const AuditReport report = audit(traj, plan, params);
    CHECK_FALSE(report.passed);
    CHECK(report.max_blur_excess == doctest::Approx(0.1));
    bool names_waypoint = false;
    for (const std::string &f : report.failures)
        names_waypoint = names_waypoint || f.find("waypoint") != std::string::npos;
    CHECK(names_waypoint);
}

TEST_CASE("audit reports the optimized plan faster than the baseline")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0),  Vec3(30, 0, 0), Vec3(30, 10, 0),
                      Vec3(0, 10, 0), Vec3(0, 20, 0), Vec3(30, 20, 0)};
    PlannerParams params;
    params.u_max = 12.0;
    params.v_axis_max = 7.6;
    params.switching_points = 3;

    const NodeSolution sol = plan_min_time(plan, params);
    const PiecewiseTrajectory traj = interpolate(sol, plan, params);
    const PiecewiseTrajectory base =
        baseline_trajectory(plan_baseline(plan, params), plan);

    const AuditReport report = audit(traj, plan, params, &base);
    CHECK(report.has_baseline);
    CHECK(report.delta_time < 0.0);
    CHECK(report.passed);
}

TEST_CASE("audit verdict is invariant under rigid translation")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(12, 5, 0), Vec3(20, -3, 2)};
    PlannerParams params;
    params.u_max = 8.0;
    params.v_axis_max = 6.0;
    params.v_blur = 4.0;
    params.switching_points = 2;

    const NodeSolution sol = plan_min_time(plan, params);
    const PiecewiseTrajectory traj = interpolate(sol, plan, params);
    const AuditReport before = audit(traj, plan, params);

    const Vec3 shift(100.0, -50.0, 20.0);
    SurveyPlan moved = plan;
    for (Vec3 &w : moved.waypoints)
        w += shift;
    PiecewiseTrajectory moved_traj = traj;
    for (auto &iv : moved_traj.intervals)
        iv.r_start += shift;
    const AuditReport after = audit(moved_traj, moved, params);

    CHECK(before.passed);
    CHECK(after.passed == before.passed);
    CHECK(after.max_waypoint_error ==
          doctest::Approx(before.max_waypoint_error).epsilon(1e-9).scale(1.0));
    CHECK(after.max_input_excess == before.max_input_excess);
    CHECK(after.total_time == before.total_time);
}

TEST_CASE("strict profile catches what the standard profile tolerates")
{
    PiecewiseTrajectory traj = bang_bang_trajectory();
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10.0 + 1e-7, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;

    const AuditReport standard = audit(traj, plan, params);
    CHECK(standard.passed);

    AuditOptions strict;
    strict.profile = ToleranceProfile::strict;
    const AuditReport tightened = audit(traj, plan, params, nullptr, strict);
    CHECK_FALSE(tightened.passed);
    CHECK(tightened.max_waypoint_error == doctest::Approx(1e-7));
}

TEST_CASE("smoothed audit relaxes only the input allowance")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;

    const NodeSolution sol = plan_min_time(plan, params);
    const PiecewiseTrajectory traj = interpolate(sol, plan, params);
    const QuarticSpline spline = smooth(traj, sol);

    AuditOptions relaxed;
    relaxed.input_allowance = 1.5;
    const AuditReport report =
        audit_smoothed(spline, traj.waypoint_times, plan, params, relaxed);
    CHECK(report.passed);
    CHECK(report.max_waypoint_error <= 1e-6);

    // At full strictness the quartic's peak acceleration exceeds the bound.
    const AuditReport tight = audit_smoothed(spline, traj.waypoint_times, plan, params);
    CHECK(tight.max_input_excess > 1.0);
}
