#include "aerosurvey/validation_oracle.hpp"

#include "aerosurvey/baseline_bang.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace aerosurvey
{

namespace
{

constexpr double kTiny = 1e-12;

void rk4_step(IntegrationState &x, const std::function<Vec3(double)> &u, double h)
{
    const Vec3 u1 = u(x.t);
    const Vec3 u2 = u(x.t + 0.5 * h);
    const Vec3 u3 = u(x.t + h);
    // r' = v is linear, so the four position slopes collapse to v plus the
    // weighted velocity increments.
    const Vec3 r_inc = x.v + (h / 6.0) * (u1 + u2 + u2);
    const Vec3 v_inc = (u1 + 4.0 * u2 + u3) / 6.0;
    x.r += h * r_inc;
    x.v += h * v_inc;
    x.t += h;
}

} // namespace

std::vector<IntegrationState> forward_integrate(const std::function<Vec3(double)> &u,
                                                const IntegrationState &x0, double t_end,
                                                double step_s)
{
    if (!(step_s > 0.0))
        throw InvalidParameterError("forward_integrate: step must be positive");
    const double horizon = t_end - x0.t;
    if (horizon < 0.0)
        throw InvalidParameterError("forward_integrate: t_end precedes the start");

    const long steps = std::max<long>(1, static_cast<long>(std::ceil(horizon / step_s - kTiny)));
    const double h = horizon / steps;

    std::vector<IntegrationState> history;
    history.reserve(steps + 1);
    IntegrationState x = x0;
    history.push_back(x);
    for (long i = 0; i < steps; ++i)
    {
        rk4_step(x, u, h);
        history.push_back(x);
    }
    history.back().t = t_end; // close exactly against accumulated roundoff
    return history;
}

std::vector<IntegrationState> forward_integrate(const PiecewiseTrajectory &traj,
                                                double step_s)
{
    if (!(step_s > 0.0))
        throw InvalidParameterError("forward_integrate: step must be positive");
    if (traj.intervals.empty())
        return {};

    std::vector<IntegrationState> history;
    IntegrationState x;
    x.t = traj.intervals.front().t_start;
    x.r = traj.intervals.front().r_start;
    x.v = traj.intervals.front().v_start;
    history.push_back(x);

    for (const PiecewiseTrajectory::Interval &iv : traj.intervals)
    {
        const double dt = iv.t_end - iv.t_start;
        if (dt <= 0.0)
            continue;
        const long steps = std::max<long>(1, static_cast<long>(std::ceil(dt / step_s - kTiny)));
        const double h = dt / steps;
        const Vec3 u = iv.u;
        auto constant = [&u](double) { return u; };
        for (long i = 0; i < steps; ++i)
        {
            rk4_step(x, constant, h);
            history.push_back(x);
        }
        x.t = iv.t_end;
        history.back().t = iv.t_end;
    }
    return history;
}

double analytic_min_time_1d(double d, double u_max, double v_cap)
{
    if (d < 0.0)
        throw InvalidParameterError("analytic_min_time_1d: distance must be nonnegative");
    if (!(u_max > 0.0))
        throw InvalidParameterError("analytic_min_time_1d: u_max must be positive");
    if (d == 0.0)
        return 0.0;
    const double peak = std::sqrt(d * u_max);
    if (peak <= v_cap)
        return 2.0 * std::sqrt(d / u_max);
    return 2.0 * v_cap / u_max + (d - v_cap * v_cap / u_max) / v_cap;
}

namespace
{

// Two constant-input intervals between fixed boundary states: given the total
// duration and the switch fraction, the per-axis inputs are determined by a
// 2x2 linear solve; feasibility checks the thrust sphere and the mid-node
// velocity box.
struct SegmentCandidate
{
    Vec3 d;
    Vec3 v_a;
    Vec3 v_b;
    double u_max;
    double v_axis_max;

    bool feasible(double total, double fraction) const
    {
        const double A = fraction * total;
        const double B = total - A;
        if (A <= kTiny || B <= kTiny)
            return false;
        Vec3 u1, u2, v_mid;
        for (int axis = 0; axis < 3; ++axis)
        {
            const double dv = v_b[axis] - v_a[axis];
            const double p = d[axis] - v_a[axis] * total;
            u2[axis] = (2.0 * p - A * dv) / (B * total);
            u1[axis] = (dv - u2[axis] * B) / A;
            v_mid[axis] = v_a[axis] + u1[axis] * A;
        }
        const double slack = 1e-9;
        if (u1.norm() > u_max + slack || u2.norm() > u_max + slack)
            return false;
        if (v_mid.cwiseAbs().maxCoeff() > v_axis_max + slack)
            return false;
        return true;
    }

    // Per-axis decoupled minimum (full sphere effort on each axis) is a lower
    // bound on any coupled profile.
    double lower_bound() const
    {
        double lb = 0.0;
        for (int axis = 0; axis < 3; ++axis)
        {
            const AxisSchedule sched =
                plan_axis_min_time(d[axis], v_a[axis], v_b[axis], u_max, v_axis_max);
            lb = std::max(lb, sched.total_time());
        }
        return lb;
    }

    std::optional<double> min_time(double fraction, double lower) const
    {
        if (lower <= kTiny)
        {
            if (d.norm() <= 1e-9 && (v_b - v_a).norm() <= 1e-9)
                return 0.0;
            lower = 1e-6;
        }
        if (feasible(lower, fraction))
            return lower;

        // Geometric ladder up from the lower bound, then bisect the onset.
        double hi = lower;
        bool found = false;
        for (int k = 0; k < 400; ++k)
        {
            hi *= 1.05;
            if (feasible(hi, fraction))
            {
                found = true;
                break;
            }
        }
        if (!found)
            return std::nullopt;
        double lo = hi / 1.05;
        for (int it = 0; it < 60; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            if (feasible(mid, fraction))
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
};

} // namespace

BruteForceResult brute_force_min_time(const SurveyPlan &plan, const PlannerParams &params,
                                      int velocity_points, int fraction_points)
{
    plan.validate();
    params.validate();
    if (plan.size() > 3)
        throw InvalidParameterError("brute_force_min_time: at most three waypoints");
    if (params.switching_points != 1)
        throw InvalidParameterError(
            "brute_force_min_time: the search assumes one interior switch per segment");
    if (velocity_points < 2 || fraction_points < 1)
        throw InvalidParameterError("brute_force_min_time: grid too small");

    double range = std::min(params.v_axis_max, params.v_blur);
    if (is_unbounded(range))
    {
        double longest = 0.0;
        for (std::size_t n = 0; n + 1 < plan.size(); ++n)
            longest = std::max(longest,
                               (plan.waypoints[n + 1] - plan.waypoints[n]).norm());
        range = std::max(1.0, std::sqrt(params.u_max * longest));
    }

    std::vector<double> fractions(fraction_points);
    for (int i = 0; i < fraction_points; ++i)
        fractions[i] = (i + 0.5) / fraction_points;

    auto best_over_fractions = [&](const SegmentCandidate &seg) -> std::optional<double> {
        double lower;
        try
        {
            lower = seg.lower_bound();
        }
        catch (const InfeasibleAxisError &)
        {
            return std::nullopt;
        }
        std::optional<double> best;
        for (double f : fractions)
        {
            const std::optional<double> t = seg.min_time(f, lower);
            if (t && (!best || *t < *best))
                best = t;
        }
        return best;
    };

    BruteForceResult result;
    std::optional<double> best;

    if (plan.size() == 2)
    {
        SegmentCandidate seg{plan.waypoints[1] - plan.waypoints[0], params.v_start,
                             params.v_end, params.u_max, params.v_axis_max};
        result.candidates = fraction_points;
        best = best_over_fractions(seg);
    }
    else
    {
        const Vec3 d1 = plan.waypoints[1] - plan.waypoints[0];
        const Vec3 d2 = plan.waypoints[2] - plan.waypoints[1];
        std::vector<double> axis_values(velocity_points);
        for (int i = 0; i < velocity_points; ++i)
            axis_values[i] = -range + 2.0 * range * i / (velocity_points - 1);

        for (double vx : axis_values)
            for (double vy : axis_values)
                for (double vz : axis_values)
                {
                    const Vec3 v1(vx, vy, vz);
                    if (v1.norm() > params.v_blur + kTiny)
                        continue; // capture-speed bound at the interior waypoint
                    ++result.candidates;
                    SegmentCandidate first{d1, params.v_start, v1, params.u_max,
                                           params.v_axis_max};
                    const std::optional<double> t1 = best_over_fractions(first);
                    if (!t1)
                        continue;
                    SegmentCandidate second{d2, v1, params.v_end, params.u_max,
                                            params.v_axis_max};
                    const std::optional<double> t2 = best_over_fractions(second);
                    if (!t2)
                        continue;
                    const double total = *t1 + *t2;
                    if (!best || total < *best)
                        best = total;
                }
    }

    if (!best)
        throw InfeasibleError("brute_force_min_time: no feasible candidate at this "
                              "grid resolution");

    result.total_time = *best;
    result.resolution_s =
        (2.0 * range / (velocity_points - 1)) / params.u_max + 1e-6;
    return result;
}

double profile_tolerance(ToleranceProfile profile)
{
    return profile == ToleranceProfile::strict ? 1e-8 : 1e-6;
}

namespace
{

void record(AuditReport &report, bool ok, const std::string &what)
{
    if (!ok)
        report.failures.push_back(what);
}

std::string describe(const char *family, double value)
{
    std::ostringstream msg;
    msg << family << " violation " << value;
    return msg.str();
}

} // namespace

AuditReport audit(const PiecewiseTrajectory &traj, const SurveyPlan &plan,
                  const PlannerParams &params, const PiecewiseTrajectory *baseline,
                  const AuditOptions &options)
{
    const double tol = profile_tolerance(options.profile);
    if (traj.waypoint_times.size() != plan.size())
        throw InvalidParameterError("audit: trajectory does not schedule every waypoint");
    for (double t : traj.waypoint_times)
        if (t < -kTiny || t > traj.duration() + 1e-9)
            throw InvalidParameterError("audit: waypoint time outside the trajectory span");

    AuditReport report;
    report.total_time = traj.duration();

    for (std::size_t n = 0; n < plan.size(); ++n)
    {
        const SampleState s = sample(traj, traj.waypoint_times[n]);
        const double err = (s.r - plan.waypoints[n]).norm();
        const double speed = s.v.norm();
        report.waypoint_error_m.push_back(err);
        report.waypoint_speed.push_back(speed);
        report.max_waypoint_error = std::max(report.max_waypoint_error, err);
        if (err > tol)
        {
            std::ostringstream msg;
            msg << "waypoint " << n << " position error " << err;
            report.failures.push_back(msg.str());
        }
        if (!is_unbounded(params.v_blur))
        {
            const double excess = std::max(0.0, speed - params.v_blur);
            report.max_blur_excess = std::max(report.max_blur_excess, excess);
            if (excess > tol)
            {
                std::ostringstream msg;
                msg << "waypoint " << n << " capture speed " << speed
                    << " exceeds the blur bound " << params.v_blur;
                report.failures.push_back(msg.str());
            }
        }
    }

    // Piecewise-linear velocity attains its extrema at interval endpoints and
    // the acceleration is constant per interval, so the interval records give
    // exact family maxima.
    const double input_bound = params.u_max * options.input_allowance;
    double prev_gap = 0.0;
    for (std::size_t k = 0; k < traj.intervals.size(); ++k)
    {
        const auto &iv = traj.intervals[k];
        const double dt = iv.t_end - iv.t_start;
        const Vec3 v_end = iv.v_start + iv.u * dt;
        if (!is_unbounded(params.v_axis_max))
        {
            const double excess =
                std::max(iv.v_start.cwiseAbs().maxCoeff(), v_end.cwiseAbs().maxCoeff()) -
                params.v_axis_max;
            report.max_axis_speed_excess =
                std::max(report.max_axis_speed_excess, std::max(0.0, excess));
        }
        report.max_input_excess =
            std::max(report.max_input_excess, std::max(0.0, iv.u.norm() - input_bound));
        if (k + 1 < traj.intervals.size())
        {
            const auto &next = traj.intervals[k + 1];
            const Vec3 r_end = iv.r_start + iv.v_start * dt + 0.5 * iv.u * dt * dt;
            prev_gap = std::max(prev_gap, (r_end - next.r_start).norm());
            prev_gap = std::max(prev_gap, (v_end - next.v_start).norm());
        }
    }
    report.max_continuity_gap = prev_gap;

    // Independent replay of the input schedule.
    const std::vector<IntegrationState> history = forward_integrate(traj, 1e-3);
    for (const IntegrationState &x : history)
    {
        const SampleState s = sample(traj, std::min(x.t, traj.duration()));
        report.reintegration_gap =
            std::max(report.reintegration_gap, (s.r - x.r).norm());
    }

    if (baseline != nullptr)
    {
        report.has_baseline = true;
        report.baseline_time = baseline->duration();
        report.delta_time = report.total_time - report.baseline_time;
    }

    record(report, report.max_axis_speed_excess <= tol,
           describe("axis velocity bound", report.max_axis_speed_excess));
    record(report, report.max_input_excess <= tol,
           describe("input magnitude bound", report.max_input_excess));
    record(report, report.max_continuity_gap <= tol,
           describe("interval continuity", report.max_continuity_gap));
    record(report, report.reintegration_gap <= std::max(tol, 1e-6),
           describe("re-integration consistency", report.reintegration_gap));

    report.passed = report.failures.empty();
    return report;
}

AuditReport audit_smoothed(const QuarticSpline &spline,
                           const std::vector<double> &waypoint_times,
                           const SurveyPlan &plan, const PlannerParams &params,
                           const AuditOptions &options)
{
    const double tol = profile_tolerance(options.profile);
    if (waypoint_times.size() != plan.size())
        throw InvalidParameterError("audit_smoothed: waypoint times do not cover the plan");

    AuditReport report;
    report.total_time = spline.duration();

    for (std::size_t n = 0; n < plan.size(); ++n)
    {
        const SampleState s = sample(spline, waypoint_times[n]);
        const double err = (s.r - plan.waypoints[n]).norm();
        const double speed = s.v.norm();
        report.waypoint_error_m.push_back(err);
        report.waypoint_speed.push_back(speed);
        report.max_waypoint_error = std::max(report.max_waypoint_error, err);
        if (err > tol)
        {
            std::ostringstream msg;
            msg << "waypoint " << n << " position error " << err;
            report.failures.push_back(msg.str());
        }
        if (!is_unbounded(params.v_blur))
        {
            const double excess = std::max(0.0, speed - params.v_blur);
            report.max_blur_excess = std::max(report.max_blur_excess, excess);
            if (excess > tol)
            {
                std::ostringstream msg;
                msg << "waypoint " << n << " capture speed " << speed
                    << " exceeds the blur bound " << params.v_blur;
                report.failures.push_back(msg.str());
            }
        }
    }

    const double input_bound = params.u_max * options.input_allowance;
    const int samples = std::max(2, options.dense_samples);
    for (int i = 0; i < samples; ++i)
    {
        const double t = spline.duration() * i / (samples - 1);
        const SampleState s = sample(spline, t);
        if (!is_unbounded(params.v_axis_max))
            report.max_axis_speed_excess =
                std::max(report.max_axis_speed_excess,
                         std::max(0.0, s.v.cwiseAbs().maxCoeff() - params.v_axis_max));
        report.max_input_excess =
            std::max(report.max_input_excess, std::max(0.0, s.a.norm() - input_bound));
    }

    record(report, report.max_axis_speed_excess <= tol,
           describe("axis velocity bound", report.max_axis_speed_excess));
    record(report, report.max_input_excess <= tol,
           describe("input magnitude bound", report.max_input_excess));

    report.passed = report.failures.empty();
    return report;
}

} // namespace aerosurvey
