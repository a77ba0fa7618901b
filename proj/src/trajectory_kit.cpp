#include "aerosurvey/trajectory_kit.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace aerosurvey
{

namespace
{

constexpr double kSampleSlack = 1e-9;

double clamp_to_span(double t, double duration, const char *what)
{
    if (t < -kSampleSlack || t > duration + kSampleSlack)
    {
        std::ostringstream msg;
        msg << what << ": time " << t << " outside [0, " << duration << "]";
        throw std::out_of_range(msg.str());
    }
    return std::clamp(t, 0.0, duration);
}

// Index of the interval owning t under the (t_start, t_end] convention with
// both endpoints of the full span closed. starts must be ascending.
template <typename GetStart>
std::size_t owning_index(double t, std::size_t count, GetStart &&start_of)
{
    std::size_t lo = 0;
    std::size_t hi = count; // first index whose start is >= t
    while (lo < hi)
    {
        const std::size_t mid = (lo + hi) / 2;
        if (start_of(mid) < t)
            lo = mid + 1;
        else
            hi = mid;
    }
    return lo == 0 ? 0 : lo - 1;
}

std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

} // namespace

PiecewiseTrajectory interpolate(const NodeSolution &sol, const SurveyPlan &plan,
                                const PlannerParams &params)
{
    const NlpResiduals residuals = evaluate_residuals(sol, plan, params);
    if (residuals.max_violation() > params.eps_feas)
    {
        std::ostringstream msg;
        msg << "solution residuals " << residuals.max_violation()
            << " exceed feasibility tolerance " << params.eps_feas
            << "; refusing to interpolate";
        throw StaleSolutionError(msg.str());
    }

    const std::size_t intervals_count = sol.dt.size();
    const std::size_t per_segment = sol.switching_points + 1;

    PiecewiseTrajectory traj;
    traj.intervals.reserve(intervals_count);

    std::vector<double> node_times(intervals_count + 1, 0.0);
    double t = 0.0;
    for (std::size_t k = 0; k < intervals_count; ++k)
    {
        const double dt = sol.dt[k];
        if (dt > 0.0)
        {
            PiecewiseTrajectory::Interval iv;
            iv.t_start = t;
            iv.t_end = t + dt;
            iv.r_start = sol.r[k];
            iv.v_start = sol.v[k];
            iv.u = sol.u[k];
            traj.intervals.push_back(iv);
        }
        t += dt;
        node_times[k + 1] = t;
    }

    const std::size_t waypoints = plan.waypoints.size();
    traj.waypoint_times.resize(waypoints, 0.0);
    for (std::size_t n = 0; n < waypoints; ++n)
        traj.waypoint_times[n] = node_times[per_segment * n];

    // Degenerate plans (single or fully coincident waypoints) may collapse to
    // no positive-length interval; keep one zero-input stub so sampling at
    // t = 0 has something to evaluate.
    if (traj.intervals.empty())
    {
        PiecewiseTrajectory::Interval iv;
        iv.r_start = sol.r.empty() ? plan.waypoints.front() : sol.r.front();
        iv.v_start = sol.v.empty() ? Vec3(Vec3::Zero()) : sol.v.front();
        traj.intervals.push_back(iv);
    }

    return traj;
}

SampleState sample(const PiecewiseTrajectory &traj, double t)
{
    if (traj.intervals.empty())
        throw std::out_of_range("sample: empty trajectory");
    t = clamp_to_span(t, traj.duration(), "sample");
    const std::size_t k = owning_index(t, traj.intervals.size(),
                                       [&](std::size_t i) { return traj.intervals[i].t_start; });
    const PiecewiseTrajectory::Interval &iv = traj.intervals[k];
    const double tau = t - iv.t_start;
    SampleState s;
    s.r = iv.r_start + tau * iv.v_start + 0.5 * tau * tau * iv.u;
    s.v = iv.v_start + tau * iv.u;
    s.a = iv.u;
    return s;
}

SampleState sample(const QuarticSpline &spline, double t)
{
    if (spline.segments.empty())
        throw std::out_of_range("sample: empty spline");
    t = clamp_to_span(t, spline.duration(), "sample");

    // Zero-duration segments never own time; pick the owning segment among
    // positive-duration ones with the same left-closed convention.
    std::vector<std::size_t> live;
    live.reserve(spline.segments.size());
    for (std::size_t i = 0; i < spline.segments.size(); ++i)
        if (spline.segments[i].duration > 0.0)
            live.push_back(i);
    if (live.empty())
    {
        SampleState s;
        s.r = spline.segments.front().coeffs.col(0);
        s.v = spline.segments.front().coeffs.col(1);
        return s;
    }
    const std::size_t pos = owning_index(
        t, live.size(), [&](std::size_t i) { return spline.segments[live[i]].t_start; });
    const QuarticSpline::Segment &seg = spline.segments[live[pos]];
    const double tau = std::clamp(t - seg.t_start, 0.0, seg.duration);

    Eigen::Matrix<double, 5, 1> powers;
    powers << 1.0, tau, tau * tau, tau * tau * tau, tau * tau * tau * tau;
    Eigen::Matrix<double, 5, 1> dpowers;
    dpowers << 0.0, 1.0, 2.0 * tau, 3.0 * tau * tau, 4.0 * tau * tau * tau;
    Eigen::Matrix<double, 5, 1> ddpowers;
    ddpowers << 0.0, 0.0, 2.0, 6.0 * tau, 12.0 * tau * tau;

    SampleState s;
    s.r = seg.coeffs * powers;
    s.v = seg.coeffs * dpowers;
    s.a = seg.coeffs * ddpowers;
    return s;
}

QuarticSpline smooth(const PiecewiseTrajectory &traj, const NodeSolution &sol,
                     double eps_time)
{
    QuarticSpline spline;
    const std::size_t waypoints = traj.waypoint_times.size();
    if (waypoints < 2)
        return spline;
    spline.segments.reserve(waypoints - 1);

    const std::size_t per_segment = sol.switching_points + 1;

    for (std::size_t n = 0; n + 1 < waypoints; ++n)
    {
        const double t_a = traj.waypoint_times[n];
        const double t_b = traj.waypoint_times[n + 1];
        const double h = t_b - t_a;

        QuarticSpline::Segment seg;
        seg.t_start = t_a;
        seg.duration = h;

        // Endpoint conditions come straight from the waypoint node states so
        // the spline inherits their positions, velocities and therefore the
        // capture-speed satisfaction exactly.
        const std::size_t node_a = per_segment * n;
        const std::size_t node_b = per_segment * (n + 1);
        const Vec3 r_a = sol.r[node_a];
        const Vec3 v_a = sol.v[node_a];

        if (h < eps_time)
        {
            // Pass the degenerate segment through as a linear polynomial.
            seg.coeffs.col(0) = r_a;
            seg.coeffs.col(1) = v_a;
            spline.segments.push_back(seg);
            continue;
        }
        const Vec3 r_b = sol.r[node_b];
        const Vec3 v_b = sol.v[node_b];
        const SampleState mid = sample(traj, t_a + 0.5 * h);

        Eigen::Matrix<double, 5, 5> conditions;
        const double hm = 0.5 * h;
        conditions << 1, 0, 0, 0, 0,                                    // position at 0
            0, 1, 0, 0, 0,                                              // velocity at 0
            1, h, h * h, h * h * h, h * h * h * h,                      // position at h
            0, 1, 2 * h, 3 * h * h, 4 * h * h * h,                      // velocity at h
            1, hm, hm * hm, hm * hm * hm, hm * hm * hm * hm;            // position at h/2

        Eigen::Matrix<double, 5, 3> rhs;
        rhs.row(0) = r_a.transpose();
        rhs.row(1) = v_a.transpose();
        rhs.row(2) = r_b.transpose();
        rhs.row(3) = v_b.transpose();
        rhs.row(4) = mid.r.transpose();

        const Eigen::Matrix<double, 5, 3> solution = conditions.fullPivLu().solve(rhs);
        seg.coeffs = solution.transpose();
        spline.segments.push_back(seg);
    }

    return spline;
}

double max_position_deviation(const PiecewiseTrajectory &traj, const QuarticSpline &spline,
                              int samples)
{
    const double duration = traj.duration();
    if (samples < 2 || duration <= 0.0)
        return 0.0;
    double worst = 0.0;
    for (int i = 0; i < samples; ++i)
    {
        const double t = duration * static_cast<double>(i) / (samples - 1);
        const Vec3 delta = sample(traj, t).r - sample(spline, t).r;
        worst = std::max(worst, delta.norm());
    }
    return worst;
}

template <typename Trajectory>
void write_csv(std::ostream &out, const Trajectory &traj, double rate_hz)
{
    if (!(rate_hz > 0.0))
        throw InvalidParameterError("write_csv: sample rate must be positive");
    out << "t,x,y,z,vx,vy,vz,ax,ay,az\n";
    const double duration = traj.duration();
    const double step = 1.0 / rate_hz;
    const long rows = static_cast<long>(std::floor(duration / step + kSampleSlack));
    auto emit = [&](double t) {
        const SampleState s = sample(traj, t);
        out << format_number(t);
        for (int axis = 0; axis < 3; ++axis)
            out << ',' << format_number(s.r[axis]);
        for (int axis = 0; axis < 3; ++axis)
            out << ',' << format_number(s.v[axis]);
        for (int axis = 0; axis < 3; ++axis)
            out << ',' << format_number(s.a[axis]);
        out << '\n';
    };
    double last = -1.0;
    for (long i = 0; i <= rows; ++i)
    {
        const double t = std::min(i * step, duration);
        emit(t);
        last = t;
    }
    if (duration - last > kSampleSlack)
        emit(duration);
}

template void write_csv<PiecewiseTrajectory>(std::ostream &, const PiecewiseTrajectory &, double);
template void write_csv<QuarticSpline>(std::ostream &, const QuarticSpline &, double);

void write_segment_table(std::ostream &out, const PiecewiseTrajectory &traj)
{
    nlohmann::json doc = nlohmann::json::array();
    for (const PiecewiseTrajectory::Interval &iv : traj.intervals)
    {
        doc.push_back({{"t_start", iv.t_start},
                       {"duration", iv.t_end - iv.t_start},
                       {"u", {iv.u.x(), iv.u.y(), iv.u.z()}}});
    }
    out << doc.dump(2) << '\n';
}

} // namespace aerosurvey
