#include <doctest.h>

#include "aerosurvey/nlp_planner.hpp"
#include "aerosurvey/trajectory_kit.hpp"

#include <json.hpp>

#include <sstream>
#include <string>

using namespace aerosurvey;

namespace
{

struct Instance
{
    SurveyPlan plan;
    PlannerParams params;
    NodeSolution sol;
};

// Rest-to-rest 10 m dash along x at full thrust: accelerate one second at
// +10, brake one second at -10.
Instance analytic_bang_bang()
{
    Instance inst;
    inst.plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    inst.params.u_max = 10.0;
    inst.params.switching_points = 1;

    inst.sol.mode = InputMode::sphere_equality;
    inst.sol.switching_points = 1;
    inst.sol.dt = {1.0, 1.0};
    inst.sol.u = {Vec3(10, 0, 0), Vec3(-10, 0, 0)};
    inst.sol.v = {Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(0, 0, 0)};
    inst.sol.r = {Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(10, 0, 0)};
    inst.sol.total_time = 2.0;
    inst.sol.converged = true;
    return inst;
}

Instance at_rest()
{
    Instance inst;
    const Vec3 p(1.0, 2.0, 3.0);
    inst.plan.waypoints = {p, p};
    inst.plan.allow_coincident = true;
    inst.params.u_max = 10.0;

    inst.sol.mode = InputMode::ball_inequality;
    inst.sol.switching_points = 1;
    inst.sol.dt = {0.5, 0.5};
    inst.sol.u = {Vec3::Zero(), Vec3::Zero()};
    inst.sol.v = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    inst.sol.r = {p, p, p};
    inst.sol.total_time = 1.0;
    inst.sol.converged = true;
    return inst;
}

Instance constant_velocity()
{
    Instance inst;
    inst.plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    inst.params.u_max = 10.0;
    inst.params.v_start = Vec3(5, 0, 0);
    inst.params.v_end = Vec3(5, 0, 0);

    inst.sol.mode = InputMode::ball_inequality;
    inst.sol.switching_points = 1;
    inst.sol.dt = {1.0, 1.0};
    inst.sol.u = {Vec3::Zero(), Vec3::Zero()};
    inst.sol.v = {Vec3(5, 0, 0), Vec3(5, 0, 0), Vec3(5, 0, 0)};
    inst.sol.r = {Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(10, 0, 0)};
    inst.sol.total_time = 2.0;
    inst.sol.converged = true;
    return inst;
}

} // namespace

TEST_CASE("zero-input solution at rest interpolates to a constant trajectory")
{
    const Instance inst = at_rest();
    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);

    CHECK(traj.duration() == doctest::Approx(1.0));
    for (double t : {0.0, 0.25, 0.5, 0.99, 1.0})
    {
        const SampleState s = sample(traj, t);
        CHECK((s.r - Vec3(1, 2, 3)).norm() == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(s.v.norm() == doctest::Approx(0.0));
        CHECK(s.a.norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("bang-bang closed-form kinematics and node states")
{
    const Instance inst = analytic_bang_bang();
    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);

    REQUIRE(traj.intervals.size() == 2);
    CHECK(traj.duration() == doctest::Approx(2.0));

    const SampleState mid = sample(traj, 1.0);
    CHECK(mid.r.x() == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(mid.v.x() == doctest::Approx(10.0).epsilon(1e-12));
    const SampleState end = sample(traj, 2.0);
    CHECK(end.r.x() == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(end.v.x() == doctest::Approx(0.0));

    // Interval boundaries reproduce the node states exactly.
    for (std::size_t k = 0; k < traj.intervals.size(); ++k)
    {
        const SampleState s = sample(traj, traj.intervals[k].t_start);
        CHECK((s.r - inst.sol.r[k]).norm() == 0.0);
        CHECK((s.v - inst.sol.v[k]).norm() == 0.0);
    }

    // Mid-interval acceleration equals that interval's input exactly; at the
    // shared boundary the left interval wins.
    CHECK(sample(traj, 0.4).a.x() == 10.0);
    CHECK(sample(traj, 1.5).a.x() == -10.0);
    CHECK(sample(traj, 1.0).a.x() == 10.0);
    CHECK(sample(traj, 0.0).a.x() == 10.0);
    CHECK(sample(traj, 2.0).a.x() == -10.0);

    CHECK_THROWS_AS(sample(traj, -0.1), std::out_of_range);
    CHECK_THROWS_AS(sample(traj, 2.1), std::out_of_range);
}

TEST_CASE("interpolation refuses solutions whose residuals exceed tolerance")
{
    Instance inst = analytic_bang_bang();
    inst.sol.r[1].x() += 0.01; // break the dynamics recursion
    CHECK_THROWS_AS(interpolate(inst.sol, inst.plan, inst.params), StaleSolutionError);
}

TEST_CASE("zero-length intervals are dropped while node bookkeeping survives")
{
    Instance inst;
    inst.plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    inst.params.u_max = 10.0;
    inst.params.switching_points = 2;

    inst.sol.mode = InputMode::ball_inequality;
    inst.sol.switching_points = 2;
    inst.sol.dt = {1.0, 0.0, 1.0};
    inst.sol.u = {Vec3(10, 0, 0), Vec3::Zero(), Vec3(-10, 0, 0)};
    inst.sol.v = {Vec3(0, 0, 0), Vec3(10, 0, 0), Vec3(10, 0, 0), Vec3(0, 0, 0)};
    inst.sol.r = {Vec3(0, 0, 0), Vec3(5, 0, 0), Vec3(5, 0, 0), Vec3(10, 0, 0)};
    inst.sol.total_time = 2.0;

    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);
    REQUIRE(traj.intervals.size() == 2);
    CHECK(traj.intervals[0].t_end == traj.intervals[1].t_start);
    const Vec3 r_end_of_first = traj.intervals[0].r_start + traj.intervals[0].v_start +
                                0.5 * traj.intervals[0].u;
    CHECK((r_end_of_first - traj.intervals[1].r_start).norm() <= 1e-9);
    REQUIRE(traj.waypoint_times.size() == 2);
    CHECK(traj.waypoint_times[0] == 0.0);
    CHECK(traj.waypoint_times[1] == doctest::Approx(2.0));
}

TEST_CASE("waypoint passage times land on the planned waypoints after a real solve")
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0), Vec3(10, 0, 0)};
    PlannerParams params;
    params.u_max = 10.0;
    params.eps_feas = 1e-8;
    params.eps_opt = 1e-6;

    const NodeSolution sol = plan_min_time(plan, params);
    const PiecewiseTrajectory traj = interpolate(sol, plan, params);

    REQUIRE(traj.waypoint_times.size() == 2);
    CHECK(traj.waypoint_times.back() == doctest::Approx(sol.total_time));
    for (std::size_t n = 0; n < plan.waypoints.size(); ++n)
    {
        const SampleState s = sample(traj, traj.waypoint_times[n]);
        CHECK((s.r - plan.waypoints[n]).norm() <= 1e-6);
    }
}

TEST_CASE("constant-velocity segment smooths to the linear polynomial")
{
    const Instance inst = constant_velocity();
    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);
    const QuarticSpline spline = smooth(traj, inst.sol);

    REQUIRE(spline.segments.size() == 1);
    const auto &c = spline.segments[0].coeffs;
    CHECK(c(0, 0) == doctest::Approx(0.0));
    CHECK(c(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
    for (int order = 2; order < 5; ++order)
        for (int axis = 0; axis < 3; ++axis)
            CHECK(std::abs(c(axis, order)) <= 1e-9);
}

TEST_CASE("bang-bang segment smooths to the hand-solved quartic")
{
    const Instance inst = analytic_bang_bang();
    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);
    const QuarticSpline spline = smooth(traj, inst.sol);

    REQUIRE(spline.segments.size() == 1);
    const auto &c = spline.segments[0].coeffs;
    // Five conditions on x: r(0)=0, r'(0)=0, r(2)=10, r'(2)=0, r(1)=5 give
    // coefficients (0, 0, 7.5, -2.5, 0).
    CHECK(std::abs(c(0, 0)) <= 1e-9);
    CHECK(std::abs(c(0, 1)) <= 1e-9);
    CHECK(c(0, 2) == doctest::Approx(7.5).epsilon(1e-9));
    CHECK(c(0, 3) == doctest::Approx(-2.5).epsilon(1e-9));
    CHECK(std::abs(c(0, 4)) <= 1e-9);

    // Interpolation conditions hold to linear-algebra exactness.
    const SampleState s0 = sample(spline, 0.0);
    const SampleState s1 = sample(spline, 1.0);
    const SampleState s2 = sample(spline, 2.0);
    CHECK(std::abs(s0.r.x()) <= 1e-9);
    CHECK(std::abs(s0.v.x()) <= 1e-9);
    CHECK(s1.r.x() == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(s2.r.x() == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(std::abs(s2.v.x()) <= 1e-9);

    // A quartic cannot match the piecewise-quadratic arc exactly.
    const double deviation = max_position_deviation(traj, spline);
    CHECK(deviation > 1e-3);
    CHECK(deviation < 1.0);
}

TEST_CASE("smoothing preserves waypoint positions and velocities exactly")
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
    const QuarticSpline spline = smooth(traj, sol);

    REQUIRE(spline.segments.size() == plan.waypoints.size() - 1);
    const int per_segment = sol.switching_points + 1;
    for (std::size_t n = 0; n < plan.waypoints.size(); ++n)
    {
        const double t_n = traj.waypoint_times[n];
        const SampleState s = sample(spline, t_n);
        const std::size_t node = static_cast<std::size_t>(per_segment) * n;
        CHECK((s.r - sol.r[node]).norm() <= 1e-9);
        CHECK((s.v - sol.v[node]).norm() <= 1e-9);
        // Capture-speed satisfaction is inherited by the smoothed trajectory.
        CHECK(s.v.norm() <= params.v_blur + params.eps_feas);
    }
}

TEST_CASE("csv export is deterministic with exact final row")
{
    const Instance inst = analytic_bang_bang();
    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);

    std::ostringstream first;
    write_csv(first, traj, 2.0);
    std::ostringstream second;
    write_csv(second, traj, 2.0);
    CHECK(first.str() == second.str());

    std::istringstream lines(first.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "t,x,y,z,vx,vy,vz,ax,ay,az");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "0,0,0,0,0,0,0,10,0,0");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "0.5,1.25,0,0,5,0,0,10,0,0");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "1,5,0,0,10,0,0,10,0,0");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "1.5,8.75,0,0,5,0,0,-10,0,0");
    REQUIRE(std::getline(lines, line));
    CHECK(line == "2,10,0,0,0,0,0,-10,0,0");
    CHECK_FALSE(std::getline(lines, line));

    // A rate whose step exceeds the horizon still closes with the final
    // instant.
    std::ostringstream sparse;
    write_csv(sparse, traj, 0.4);
    std::istringstream sparse_lines(sparse.str());
    int rows = 0;
    while (std::getline(sparse_lines, line))
        ++rows;
    CHECK(rows == 3); // header, t=0, t=T
}

TEST_CASE("segment table lists start, duration and input per interval")
{
    const Instance inst = analytic_bang_bang();
    const PiecewiseTrajectory traj = interpolate(inst.sol, inst.plan, inst.params);

    std::ostringstream out;
    write_segment_table(out, traj);
    const nlohmann::json doc = nlohmann::json::parse(out.str());
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["t_start"].get<double>() == doctest::Approx(0.0));
    CHECK(doc[0]["duration"].get<double>() == doctest::Approx(1.0));
    CHECK(doc[0]["u"][0].get<double>() == doctest::Approx(10.0));
    CHECK(doc[1]["t_start"].get<double>() == doctest::Approx(1.0));
    CHECK(doc[1]["u"][0].get<double>() == doctest::Approx(-10.0));
}
