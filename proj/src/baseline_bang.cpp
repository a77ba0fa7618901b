#include "aerosurvey/baseline_bang.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

namespace aerosurvey
{

namespace
{

constexpr double kTiny = 1e-12;

void push_phase(AxisSchedule &sched, int sign, double duration)
{
    if (duration > kTiny)
        sched.phases.push_back({sign, duration});
}

AxisSchedule mirror(AxisSchedule sched)
{
    for (AxisSchedule::Phase &p : sched.phases)
        p.sign = -p.sign;
    return sched;
}

// Candidate that accelerates first: full effort up to the peak (or the cap
// with a cruise), then full effort down to vf. Valid when the peak clears
// both boundary velocities.
std::optional<AxisSchedule> accel_first(double d, double v0, double vf, double u,
                                        double cap)
{
    const double peak_sq = d * u + 0.5 * (v0 * v0 + vf * vf);
    if (peak_sq < 0.0)
        return std::nullopt;
    const double peak = std::sqrt(peak_sq);
    if (peak + kTiny < std::max(v0, vf))
        return std::nullopt;

    AxisSchedule sched;
    sched.u_mag = u;
    if (peak <= cap)
    {
        push_phase(sched, +1, std::max(0.0, (peak - v0) / u));
        push_phase(sched, -1, std::max(0.0, (peak - vf) / u));
    }
    else
    {
        const double cruise_d = d - (cap * cap - v0 * v0) / (2.0 * u) -
                                (cap * cap - vf * vf) / (2.0 * u);
        if (cruise_d < -kTiny)
            return std::nullopt;
        push_phase(sched, +1, std::max(0.0, (cap - v0) / u));
        push_phase(sched, 0, std::max(0.0, cruise_d / cap));
        push_phase(sched, -1, std::max(0.0, (cap - vf) / u));
    }
    return sched;
}

// Candidate that decelerates first down to a valley (or the lower cap with a
// reverse cruise), then accelerates to vf.
std::optional<AxisSchedule> decel_first(double d, double v0, double vf, double u,
                                        double cap)
{
    const double valley_sq = 0.5 * (v0 * v0 + vf * vf) - d * u;
    if (valley_sq < 0.0)
        return std::nullopt;
    const double root = std::sqrt(valley_sq);
    // Larger valley is faster; take +root when it still sits below both
    // boundary velocities, otherwise swing negative.
    const double valley = (root <= std::min(v0, vf) + kTiny) ? root : -root;
    if (valley - kTiny > std::min(v0, vf))
        return std::nullopt;

    AxisSchedule sched;
    sched.u_mag = u;
    if (valley >= -cap)
    {
        push_phase(sched, -1, std::max(0.0, (v0 - valley) / u));
        push_phase(sched, +1, std::max(0.0, (vf - valley) / u));
    }
    else
    {
        const double cruise_d = d - (v0 * v0 - cap * cap) / (2.0 * u) -
                                (vf * vf - cap * cap) / (2.0 * u);
        if (cruise_d > kTiny)
            return std::nullopt; // reverse cruise must move backwards
        push_phase(sched, -1, std::max(0.0, (v0 + cap) / u));
        push_phase(sched, 0, std::max(0.0, -cruise_d / cap));
        push_phase(sched, +1, std::max(0.0, (vf + cap) / u));
    }
    return sched;
}

// Endpoint state of an axis schedule starting from (0, v0).
void integrate_axis(const AxisSchedule &sched, double v0, double &d_out, double &v_out)
{
    double d = 0.0;
    double v = v0;
    for (const AxisSchedule::Phase &p : sched.phases)
    {
        const double a = p.sign * sched.u_mag;
        d += v * p.duration + 0.5 * a * p.duration * p.duration;
        v += a * p.duration;
    }
    d_out = d;
    v_out = v;
}

} // namespace

AxisSchedule plan_axis_min_time(double d, double v0, double vf, double u_axis,
                                double v_cap)
{
    if (!(u_axis > 0.0))
        throw InvalidParameterError("plan_axis_min_time: axis effort must be positive");
    if (std::abs(v0) > v_cap + kTiny || std::abs(vf) > v_cap + kTiny)
    {
        std::ostringstream msg;
        msg << "plan_axis_min_time: boundary velocity outside the axis cap "
            << v_cap;
        throw InfeasibleAxisError(msg.str());
    }
    if (d < 0.0)
        return mirror(plan_axis_min_time(-d, -v0, -vf, u_axis, v_cap));

    std::optional<AxisSchedule> best;
    for (const auto &candidate :
         {accel_first(d, v0, vf, u_axis, v_cap), decel_first(d, v0, vf, u_axis, v_cap)})
    {
        if (!candidate)
            continue;
        if (!best || candidate->total_time() < best->total_time())
            best = candidate;
    }
    if (!best)
        throw InfeasibleAxisError("plan_axis_min_time: no bang-singular-bang profile "
                                  "reaches the requested boundary velocities");
    return *best;
}

AxisSchedule plan_axis_fixed_time(double d, double u_axis, double v_cap, double total)
{
    if (!(u_axis > 0.0))
        throw InvalidParameterError("plan_axis_fixed_time: axis effort must be positive");
    if (total < 0.0)
        throw InvalidParameterError("plan_axis_fixed_time: duration must be nonnegative");
    if (d < 0.0)
        return mirror(plan_axis_fixed_time(-d, u_axis, v_cap, total));

    AxisSchedule sched;
    if (d <= kTiny)
    {
        // Zero-input dwell at rest.
        sched.u_mag = 0.0;
        push_phase(sched, 0, total);
        return sched;
    }

    // Reduced-effort triangle of the requested duration.
    const double reduced = 4.0 * d / (total * total);
    const double peak = 2.0 * d / total;
    if (reduced <= u_axis + kTiny && peak <= v_cap + kTiny)
    {
        sched.u_mag = std::min(reduced, u_axis);
        push_phase(sched, +1, 0.5 * total);
        push_phase(sched, -1, 0.5 * total);
        return sched;
    }

    // Full-effort trapezoid with a lowered cruise speed.
    const double disc = u_axis * u_axis * total * total - 4.0 * d * u_axis;
    if (disc < 0.0)
        throw InfeasibleAxisError("plan_axis_fixed_time: requested duration below "
                                  "the axis minimum");
    const double cruise_v = 0.5 * (u_axis * total - std::sqrt(disc));
    if (cruise_v > v_cap + 1e-9)
        throw InfeasibleAxisError("plan_axis_fixed_time: stretched cruise exceeds "
                                  "the velocity cap");
    const double t_ramp = cruise_v / u_axis;
    sched.u_mag = u_axis;
    push_phase(sched, +1, t_ramp);
    push_phase(sched, 0, std::max(0.0, total - 2.0 * t_ramp));
    push_phase(sched, -1, t_ramp);
    return sched;
}

BangSchedule plan_segment(const Vec3 &w_a, const Vec3 &w_b, const Vec3 &v_a,
                          const Vec3 &v_b, const PlannerParams &params)
{
    const double u_axis = params.u_max / std::sqrt(3.0);
    const double cap = params.v_axis_max;
    const Vec3 d = w_b - w_a;

    BangSchedule seg;
    double slowest = 0.0;
    for (int axis = 0; axis < 3; ++axis)
    {
        seg.axes[axis] = plan_axis_min_time(d[axis], v_a[axis], v_b[axis], u_axis, cap);
        slowest = std::max(slowest, seg.axes[axis].total_time());
    }
    seg.total_time = slowest;

    const bool rest_to_rest = v_a.norm() <= kTiny && v_b.norm() <= kTiny;
    for (int axis = 0; axis < 3; ++axis)
    {
        AxisSchedule &sched = seg.axes[axis];
        const double slack = slowest - sched.total_time();
        if (slack <= kTiny)
            continue;
        bool stretched = false;
        if (rest_to_rest)
        {
            try
            {
                sched = plan_axis_fixed_time(d[axis], u_axis, cap, slowest);
                stretched = true;
            }
            catch (const InfeasibleAxisError &)
            {
                stretched = false;
            }
        }
        if (!stretched)
        {
            // Fall back to padding the minimum-time profile with a dwell.
            push_phase(sched, 0, slack);
            seg.dwell_inserted = true;
        }
    }
    return seg;
}

BaselinePlan plan_baseline(const SurveyPlan &plan, const PlannerParams &params)
{
    plan.validate();
    params.validate();

    BaselinePlan baseline;
    baseline.segments.reserve(plan.size() > 0 ? plan.size() - 1 : 0);
    for (std::size_t n = 0; n + 1 < plan.size(); ++n)
    {
        BangSchedule seg = plan_segment(plan.waypoints[n], plan.waypoints[n + 1],
                                        Vec3::Zero(), Vec3::Zero(), params);
        baseline.total_time += seg.total_time;
        baseline.dwell_inserted = baseline.dwell_inserted || seg.dwell_inserted;
        baseline.segments.push_back(std::move(seg));
    }
    return baseline;
}

PiecewiseTrajectory baseline_trajectory(const BaselinePlan &baseline,
                                        const SurveyPlan &plan)
{
    PiecewiseTrajectory traj;
    traj.waypoint_times.reserve(plan.size());
    traj.waypoint_times.push_back(0.0);

    double t = 0.0;
    Vec3 r = plan.waypoints.empty() ? Vec3(Vec3::Zero()) : plan.waypoints.front();
    Vec3 v = Vec3::Zero();

    for (const BangSchedule &seg : baseline.segments)
    {
        // Merge the per-axis switch instants into shared breakpoints.
        std::vector<double> cuts = {0.0, seg.total_time};
        for (const AxisSchedule &axis : seg.axes)
        {
            double local = 0.0;
            for (const AxisSchedule::Phase &p : axis.phases)
            {
                local += p.duration;
                cuts.push_back(std::min(local, seg.total_time));
            }
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end(),
                               [](double a, double b) { return b - a <= kTiny; }),
                   cuts.end());

        auto axis_input = [](const AxisSchedule &axis, double tau) {
            double start = 0.0;
            for (const AxisSchedule::Phase &p : axis.phases)
            {
                if (tau < start + p.duration)
                    return p.sign * axis.u_mag;
                start += p.duration;
            }
            return 0.0;
        };

        for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
        {
            const double dt = cuts[c + 1] - cuts[c];
            const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
            Vec3 u;
            for (int axis = 0; axis < 3; ++axis)
                u[axis] = axis_input(seg.axes[axis], mid);

            PiecewiseTrajectory::Interval iv;
            iv.t_start = t;
            iv.t_end = t + dt;
            iv.r_start = r;
            iv.v_start = v;
            iv.u = u;
            traj.intervals.push_back(iv);

            r += v * dt + 0.5 * u * dt * dt;
            v += u * dt;
            t += dt;
        }
        traj.waypoint_times.push_back(t);
    }

    if (traj.intervals.empty())
    {
        PiecewiseTrajectory::Interval iv;
        iv.r_start = r;
        traj.intervals.push_back(iv);
    }
    return traj;
}

} // namespace aerosurvey
