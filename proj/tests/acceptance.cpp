// End-to-end acceptance checks for the minimum-time survey planner.
//
// Each test case evaluates one acceptance criterion and prints a single
// verdict line ("[criterion N] PASS/FAIL ...") with the measured quantities.
// Later criteria (5-7) sweep every instance solved by the earlier ones, so
// the cases share a registry and must run in declaration order (the doctest
// default).
#include <doctest.h>

#include "aerosurvey/baseline_bang.hpp"
#include "aerosurvey/camera_survey.hpp"
#include "aerosurvey/nlp_planner.hpp"
#include "aerosurvey/planner_params.hpp"
#include "aerosurvey/trajectory_kit.hpp"
#include "aerosurvey/validation_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace aerosurvey;

namespace
{

struct SuiteRecord
{
    std::string label;
    SurveyPlan plan;
    PlannerParams params;
    NodeSolution sol;
};

std::vector<SuiteRecord> &suite()
{
    static std::vector<SuiteRecord> records;
    return records;
}

const NodeSolution &solve_into_suite(const std::string &label, const SurveyPlan &plan,
                                     const PlannerParams &params)
{
    SuiteRecord rec{label, plan, params, plan_min_time(plan, params)};
    suite().push_back(std::move(rec));
    return suite().back().sol;
}

void verdict(int criterion, bool pass, const std::string &detail)
{
    std::printf("[criterion %d] %s  %s\n", criterion, pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

class Stopwatch
{
public:
    double seconds() const
    {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

std::string fmt(const char *pattern, ...)
{
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

SurveyPlan serpentine_3x2()
{
    SurveyPlan plan;
    plan.waypoints = {Vec3(0, 0, 0),  Vec3(30, 0, 0), Vec3(30, 10, 0),
                      Vec3(0, 10, 0), Vec3(0, 20, 0), Vec3(30, 20, 0)};
    return plan;
}

} // namespace

TEST_CASE("criterion 1: published 30x20 m survey, optimized vs rest-to-rest")
{
    Stopwatch watch;
    const SurveyPlan plan = serpentine_3x2();
    PlannerParams params;
    params.u_max = 12.0;
    params.v_axis_max = 7.6;
    params.switching_points = 3;

    const NodeSolution sol = solve_into_suite("survey-30x20", plan, params);
    const BaselinePlan base = plan_baseline(plan, params);
    const double elapsed = watch.seconds();

    const bool nlp_in_band = std::abs(sol.total_time - 16.3) <= 0.10 * 16.3;
    const bool beats_baseline = sol.total_time < base.total_time;
    const bool base_in_band = std::abs(base.total_time - 17.5) <= 0.15 * 17.5;
    const bool in_time = elapsed < 30.0;
    const bool pass = nlp_in_band && beats_baseline && base_in_band && in_time;

    verdict(1, pass,
            fmt("optimized %.3f s (band 14.67..17.93), baseline %.3f s "
                "(band 14.88..20.12), %.1f s wall",
                sol.total_time, base.total_time, elapsed));
    CHECK(nlp_in_band);
    CHECK(beats_baseline);
    CHECK(base_in_band);
    CHECK(in_time);
}

TEST_CASE("criterion 2: 50 randomized 1-D transfers vs the closed form")
{
    Stopwatch watch;
    std::mt19937 rng(2026u);
    std::uniform_real_distribution<double> d_dist(1.0, 200.0);
    std::uniform_real_distribution<double> u_dist(2.0, 20.0);
    std::uniform_real_distribution<double> cap_factor(0.2, 1.5);

    double worst_rel = 0.0;
    int worst_index = -1;
    for (int i = 0; i < 50; ++i)
    {
        const double d = d_dist(rng);
        const double u = u_dist(rng);
        const bool capped = (i % 2 == 1);
        const double v_cap = capped ? cap_factor(rng) * std::sqrt(d * u) : kInf;

        SurveyPlan plan;
        plan.waypoints = {Vec3::Zero(), Vec3(d, 0, 0)};
        PlannerParams params;
        params.u_max = u;
        params.v_axis_max = v_cap;
        params.switching_points = 1;
        // The replay check (criterion 6) integrates the schedule across the
        // whole horizon, so per-node dynamics defects accumulate; solve
        // tighter than the 1e-6 replay bar.
        params.eps_feas = 1e-8;
        params.eps_opt = 1e-8;

        const NodeSolution sol =
            solve_into_suite(fmt("1d-%02d", i), plan, params);
        const double expected = analytic_min_time_1d(d, u, v_cap);
        const double rel = std::abs(sol.total_time - expected) / expected;
        if (rel > worst_rel)
        {
            worst_rel = rel;
            worst_index = i;
        }
    }
    const double elapsed = watch.seconds();
    const bool accurate = worst_rel <= 1e-4;
    const bool in_time = elapsed < 60.0;

    verdict(2, accurate && in_time,
            fmt("worst relative error %.2e (instance %d, limit 1e-4), %.1f s wall",
                worst_rel, worst_index, elapsed));
    CHECK(accurate);
    CHECK(in_time);
}

TEST_CASE("criterion 3: 10 three-waypoint instances vs the brute-force grid")
{
    Stopwatch watch;
    struct Instance
    {
        Vec3 w1, w2;
        double u_max, v_axis_max, v_blur;
    };
    const std::vector<Instance> instances = {
        {Vec3(8, 3, 0), Vec3(12, 9, 0), 6.0, 7.0, 4.0},
        {Vec3(10, 0, 0), Vec3(20, 0, 0), 8.0, kInf, kInf},
        {Vec3(6, 6, 0), Vec3(12, 0, 0), 5.0, kInf, 3.0},
        {Vec3(15, -4, 0), Vec3(25, 5, 0), 10.0, 12.0, kInf},
        {Vec3(5, 2, 1), Vec3(9, 7, 2), 4.0, 6.0, kInf},
        {Vec3(12, 0, 0), Vec3(12, 12, 0), 9.0, 10.0, 5.0},
        {Vec3(4, 4, 0), Vec3(16, 4, 0), 7.0, 8.0, 8.0},
        {Vec3(20, 6, 0), Vec3(30, -2, 0), 12.0, kInf, 7.0},
        {Vec3(7, 0, 2), Vec3(14, 0, 0), 6.0, 9.0, kInf},
        {Vec3(9, 9, 0), Vec3(0, 14, 0), 8.0, 11.0, 6.0},
    };

    bool pass = true;
    double worst_low = kInf;  // min of (nlp - (bf - cell))
    double worst_high = 0.0;  // max of nlp / bf
    for (std::size_t i = 0; i < instances.size(); ++i)
    {
        const Instance &inst = instances[i];
        SurveyPlan plan;
        plan.waypoints = {Vec3::Zero(), inst.w1, inst.w2};
        PlannerParams params;
        params.u_max = inst.u_max;
        params.v_axis_max = inst.v_axis_max;
        params.v_blur = inst.v_blur;
        params.switching_points = 1;
        params.eps_feas = 1e-8; // see criterion 6 note on replay accumulation
        params.eps_opt = 1e-8;

        const BruteForceResult bf = brute_force_min_time(plan, params, 21, 21);
        const NodeSolution sol =
            solve_into_suite(fmt("n3-%02zu", i), plan, params);

        const bool above_floor = sol.total_time >= bf.total_time - bf.resolution_s;
        const bool below_cap = sol.total_time <= bf.total_time * 1.05;
        worst_low = std::min(worst_low,
                             sol.total_time - (bf.total_time - bf.resolution_s));
        worst_high = std::max(worst_high, sol.total_time / bf.total_time);
        if (!(above_floor && below_cap))
        {
            pass = false;
            std::printf("  instance %zu: optimized %.4f s, grid %.4f s "
                        "(cell %.4f s)\n",
                        i, sol.total_time, bf.total_time, bf.resolution_s);
        }
        CHECK_MESSAGE(above_floor, i);
        CHECK_MESSAGE(below_cap, i);
    }
    const double elapsed = watch.seconds();
    const bool in_time = elapsed < 300.0;

    verdict(3, pass && in_time,
            fmt("floor margin %.3e s, worst ratio %.4f (cap 1.05), %.1f s wall",
                worst_low, worst_high, elapsed));
    CHECK(in_time);
}

TEST_CASE("criterion 4: 350x600 m survey feasibility at full scale")
{
    Stopwatch watch;
    CameraSpec camera;
    camera.fov_h_rad = 87.0 * M_PI / 180.0;
    camera.fov_v_rad = 71.0 * M_PI / 180.0;
    const SurveyPlan plan = generate_lawnmower(350.0, 600.0, 120.0, 0.5, camera);

    PlannerParams params;
    params.u_max = 14.0;
    params.v_axis_max = 10.0;
    params.v_blur = 5.0;
    params.switching_points = 3;

    const NodeSolution sol = solve_into_suite("survey-350x600", plan, params);
    const double elapsed = watch.seconds();

    const int per_seg = sol.switching_points + 1;
    double worst_wp = 0.0, worst_speed = 0.0, worst_axis = 0.0, worst_input = 0.0;
    for (std::size_t n = 0; n < plan.waypoints.size(); ++n)
    {
        const std::size_t node = static_cast<std::size_t>(per_seg) * n;
        worst_wp = std::max(worst_wp,
                            (sol.r[node] - plan.waypoints[n]).norm());
        worst_speed = std::max(worst_speed, sol.v[node].norm());
    }
    for (const Vec3 &v : sol.v)
        worst_axis = std::max(worst_axis, v.cwiseAbs().maxCoeff());
    // The input-norm family follows the mode the pipeline actually solved in.
    // A sphere-equality cruise between captures 113.9 m apart would need far
    // more switching points than the retry ladder allows (each full-thrust
    // interval advances at most ~20 m under the 10 m/s per-axis node cap), so
    // this instance legitimately lands in the ball-inequality relaxation and
    // the audit checks ||u|| <= u_max there.
    for (const Vec3 &u : sol.u)
    {
        const double n = u.norm();
        worst_input = std::max(worst_input, sol.mode == InputMode::sphere_equality
                                                ? std::abs(n - params.u_max)
                                                : n - params.u_max);
    }

    const bool wp_ok = worst_wp <= 1e-6;
    const bool speed_ok = worst_speed <= params.v_blur + 1e-6;
    const bool axis_ok = worst_axis <= params.v_axis_max + 1e-6;
    const bool input_ok = worst_input <= 1e-6;
    const bool in_time = elapsed < 300.0;
    const bool pass = wp_ok && speed_ok && axis_ok && input_ok && in_time;

    verdict(4, pass,
            fmt("%zu waypoints: position %.1e m, capture speed %.4f, axis %.4f, "
                "input-norm excess %.1e (%s, S=%d), %.1f s wall",
                plan.waypoints.size(), worst_wp, worst_speed, worst_axis,
                worst_input, to_string(sol.mode), sol.switching_points, elapsed));
    CHECK(wp_ok);
    CHECK(speed_ok);
    CHECK(axis_ok);
    CHECK(input_ok);
    CHECK(in_time);
}

TEST_CASE("criterion 5: every solve beats its fixed-step warm start")
{
    bool pass = true;
    double worst_margin = -kInf;
    std::string worst_label = "-";
    for (const SuiteRecord &rec : suite())
    {
        const double margin =
            rec.sol.total_time - rec.sol.warm_start_makespan;
        if (margin > worst_margin)
        {
            worst_margin = margin;
            worst_label = rec.label;
        }
        if (!(margin <= 1e-6))
        {
            pass = false;
            std::printf("  %s: total %.6f s vs warm start %.6f s\n",
                        rec.label.c_str(), rec.sol.total_time,
                        rec.sol.warm_start_makespan);
        }
    }
    verdict(5, pass,
            fmt("%zu instances, worst margin %.3e s (%s, limit 1e-6)",
                suite().size(), worst_margin, worst_label.c_str()));
    CHECK(pass);
    CHECK(suite().size() >= 62);
}

TEST_CASE("criterion 6: integrating the input schedule reproduces the states")
{
    bool pass = true;
    double worst_gap = 0.0;
    std::string worst_label = "-";
    for (const SuiteRecord &rec : suite())
    {
        const PiecewiseTrajectory traj = interpolate(rec.sol, rec.plan, rec.params);
        const AuditReport report = audit(traj, rec.plan, rec.params);
        if (report.reintegration_gap > worst_gap)
        {
            worst_gap = report.reintegration_gap;
            worst_label = rec.label;
        }
        if (!(report.reintegration_gap <= 1e-6))
        {
            pass = false;
            std::printf("  %s: replay gap %.3e m\n", rec.label.c_str(),
                        report.reintegration_gap);
        }
    }
    verdict(6, pass,
            fmt("%zu instances, worst replay gap %.3e m (%s, limit 1e-6)",
                suite().size(), worst_gap, worst_label.c_str()));
    CHECK(pass);
}

TEST_CASE("criterion 7: quartic smoothing interpolates exactly")
{
    bool pass = true;
    double worst_condition = 0.0;
    double worst_blur = 0.0;
    std::string worst_label = "-";
    for (const SuiteRecord &rec : suite())
    {
        const PiecewiseTrajectory traj = interpolate(rec.sol, rec.plan, rec.params);
        const QuarticSpline spline = smooth(traj, rec.sol);

        const int per_seg = rec.sol.switching_points + 1;
        double local = 0.0;
        for (std::size_t seg = 0; seg < spline.segments.size(); ++seg)
        {
            const auto &piece = spline.segments[seg];
            const double t0 = piece.t_start;
            const double t1 = piece.t_start + piece.duration;
            const double tm = piece.t_start + 0.5 * piece.duration;
            const std::size_t node_a = static_cast<std::size_t>(per_seg) * seg;
            const std::size_t node_b = node_a + static_cast<std::size_t>(per_seg);

            const SampleState at_a = sample(spline, t0);
            const SampleState at_b = sample(spline, t1);
            local = std::max(local, (at_a.r - rec.sol.r[node_a]).norm());
            local = std::max(local, (at_a.v - rec.sol.v[node_a]).norm());
            local = std::max(local, (at_b.r - rec.sol.r[node_b]).norm());
            local = std::max(local, (at_b.v - rec.sol.v[node_b]).norm());
            local = std::max(local,
                             (sample(spline, tm).r - sample(traj, tm).r).norm());
        }
        // capture-speed inheritance: the spline must not move faster than the
        // blur bound at any waypoint instant the underlying solve satisfied
        if (std::isfinite(rec.params.v_blur))
        {
            for (double t : traj.waypoint_times)
            {
                const double excess =
                    sample(spline, t).v.norm() - rec.params.v_blur;
                worst_blur = std::max(worst_blur, excess);
                if (excess > rec.params.eps_feas + 1e-9)
                    pass = false;
            }
        }
        if (local > worst_condition)
        {
            worst_condition = local;
            worst_label = rec.label;
        }
        if (!(local <= 1e-9))
        {
            pass = false;
            std::printf("  %s: interpolation residual %.3e\n", rec.label.c_str(),
                        local);
        }
    }
    verdict(7, pass,
            fmt("%zu instances, worst condition residual %.3e (%s, limit 1e-9), "
                "worst capture-speed excess %.3e",
                suite().size(), worst_condition, worst_label.c_str(), worst_blur));
    CHECK(pass);
}

TEST_CASE("criterion 8: analytic gradients vs central differences")
{
    Stopwatch watch;
    struct Instance
    {
        std::vector<Vec3> waypoints;
        double u_max, v_axis_max, v_blur, u_z_min;
        int switching_points;
        InputMode mode;
    };
    const std::vector<Instance> instances = {
        {{Vec3(0, 0, 0), Vec3(12, 5, 0), Vec3(20, -3, 2)},
         8.0, 6.0, 4.0, -5.0, 2, InputMode::sphere_equality},
        {{Vec3(0, 0, 0), Vec3(12, 5, 0), Vec3(20, -3, 2)},
         8.0, 6.0, 4.0, -5.0, 2, InputMode::ball_inequality},
        {{Vec3(0, 0, 0), Vec3(10, 0, 0)}, 5.0, kInf, kInf, -kInf, 1,
         InputMode::sphere_equality},
        {{Vec3(0, 0, 0), Vec3(6, 6, 1), Vec3(0, 12, 0), Vec3(-6, 6, -1)},
         10.0, 9.0, 3.0, -8.0, 1, InputMode::ball_inequality},
        {{Vec3(0, 0, 0), Vec3(25, 0, 0)}, 15.0, 12.0, 6.0, -kInf, 3,
         InputMode::sphere_equality},
    };

    double worst = 0.0;
    int worst_instance = -1;
    std::mt19937 rng(17u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (std::size_t idx = 0; idx < instances.size(); ++idx)
    {
        const Instance &inst = instances[idx];
        SurveyPlan plan;
        plan.waypoints = inst.waypoints;
        PlannerParams params;
        params.u_max = inst.u_max;
        params.v_axis_max = inst.v_axis_max;
        params.v_blur = inst.v_blur;
        params.u_z_min = inst.u_z_min;
        params.switching_points = inst.switching_points;

        MinTimeLagrangian model(plan, params, inst.mode);
        const int K = model.num_intervals();

        for (int trial = 0; trial < 10; ++trial)
        {
            for (Eigen::Index i = 0; i < model.lambda.size(); ++i)
                model.lambda(i) = 2.0 * gauss(rng);
            model.rho = std::pow(10.0, 2.0 * unif(rng));

            Eigen::VectorXd z(model.dimension());
            Eigen::Index pos = 0;
            if (inst.mode == InputMode::sphere_equality)
            {
                for (int k = 0; k < K; ++k)
                    z(pos++) = (2.0 * unif(rng) - 1.0) * 3.1;
                for (int k = 0; k < K; ++k)
                    z(pos++) = 0.2 + 2.7 * unif(rng);
            }
            else
            {
                for (int k = 0; k < 3 * K; ++k)
                    z(pos++) = (2.0 * unif(rng) - 1.0) * params.u_max;
            }
            for (int k = 0; k < K; ++k)
                z(pos++) = 0.4 + 0.9 * unif(rng);
            while (pos < z.size())
                z(pos++) = (2.0 * unif(rng) - 1.0) * 5.0;

            // keep multipliers away from the max(0, mu + rho g) kink where the
            // penalty is only C^1 and the difference quotient is off by design
            Eigen::VectorXd c0, g0;
            model.constraints(z, c0, g0);
            for (Eigen::Index i = 0; i < model.mu.size(); ++i)
            {
                model.mu(i) = std::abs(gauss(rng));
                const double margin =
                    0.1 * std::max(1.0, std::abs(model.rho * g0(i)) * 1e-3);
                if (std::abs(model.mu(i) + model.rho * g0(i)) < margin)
                    model.mu(i) += 2.0 * margin;
            }

            Eigen::VectorXd grad(model.dimension());
            model.value_and_gradient(z, grad);
            Eigen::VectorXd probe = grad;
            for (Eigen::Index i = 0; i < z.size(); ++i)
            {
                const double h = 1e-6 * std::max(1.0, std::abs(z(i)));
                Eigen::VectorXd zp = z, zm = z;
                zp(i) += h;
                zm(i) -= h;
                const double fp = model.value_and_gradient(zp, probe);
                const double fm = model.value_and_gradient(zm, probe);
                const double fd = (fp - fm) / (2.0 * h);
                const double scale =
                    std::max({1.0, std::abs(fd), std::abs(grad(i))});
                const double rel = std::abs(fd - grad(i)) / scale;
                if (rel > worst)
                {
                    worst = rel;
                    worst_instance = static_cast<int>(idx);
                }
            }
        }
    }
    const double elapsed = watch.seconds();
    const bool pass = worst <= 1e-5;

    verdict(8, pass,
            fmt("worst relative gradient error %.2e (instance %d, limit 1e-5), "
                "%.1f s wall",
                worst, worst_instance, elapsed));
    CHECK(pass);
}
