#include "aerosurvey/nlp_planner.hpp"

#include "aerosurvey/quasi_newton.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace aerosurvey
{

namespace
{

constexpr int kMaxOuter = 30;
constexpr double kPenaltyGrowth = 10.0;
constexpr double kPenaltyInitial = 1.0;
constexpr double kPenaltyMax = 1e10;
constexpr int kFallbackMaxSwitching = 5;

/// Worst positive entry (0 when every inequality holds).
double positive_max(const Eigen::VectorXd &g)
{
    double m = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i)
        m = std::max(m, g(i));
    return m;
}

double inf_norm(const Eigen::VectorXd &v)
{
    return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

/// Boundary nodes carry prescribed velocities and sit on capture points, so
/// their constraints cannot be optimized; reject parameters that violate them.
void check_boundary_state(const PlannerParams &params)
{
    for (const Vec3 *v : {&params.v_start, &params.v_end})
    {
        if (std::isfinite(params.v_axis_max) &&
            v->cwiseAbs().maxCoeff() > params.v_axis_max + params.eps_feas)
            throw InvalidParameterError("boundary velocity exceeds the per-axis bound");
        if (std::isfinite(params.v_blur) && v->norm() > params.v_blur + params.eps_feas)
            throw InvalidParameterError("boundary velocity exceeds the blur speed bound");
    }
}

} // namespace

const char *to_string(InputMode mode)
{
    switch (mode)
    {
    case InputMode::sphere_equality:
        return "sphere-equality";
    case InputMode::ball_inequality:
        return "relaxed-inequality";
    }
    return "unknown";
}

double NlpResiduals::max_violation() const
{
    return std::max({dynamics, waypoint, blur, sphere, axis_box, boundary});
}

MinTimeLagrangian::MinTimeLagrangian(const SurveyPlan &plan, const PlannerParams &params,
                                     InputMode mode)
    : plan_(&plan), params_(params), mode_(mode)
{
    plan.validate();
    params.validate();

    const int N = static_cast<int>(plan.size());
    per_seg_ = params.intervals_per_segment();
    K_ = per_seg_ * (N - 1);
    M_ = K_ + 1;

    const int interior = 3 * (M_ - 2);
    if (mode_ == InputMode::sphere_equality)
    {
        theta_off_ = 0;
        phi_off_ = K_;
        s_off_ = 2 * K_;
        v_off_ = 3 * K_;
        dim_ = 3 * K_ + interior;
    }
    else
    {
        u_off_ = 0;
        s_off_ = 3 * K_;
        v_off_ = 4 * K_;
        dim_ = 4 * K_ + interior;
    }

    lambda = Eigen::VectorXd::Zero(3 * K_ + 3 * (N - 1));

    // capture-speed cones apply at waypoint nodes only; boundary nodes are
    // constants checked up front, so just the interior waypoints enter here
    if (std::isfinite(params_.v_blur))
        for (int n = 2; n <= N - 1; ++n)
            ineqs_.push_back({Inequality::Kind::capture_speed, per_seg_ * (n - 1), 0});
    if (std::isfinite(params_.v_axis_max))
        for (int j = 1; j <= M_ - 2; ++j)
            for (int a = 0; a < 3; ++a)
            {
                ineqs_.push_back({Inequality::Kind::box_upper, j, a});
                ineqs_.push_back({Inequality::Kind::box_lower, j, a});
            }
    if (mode_ == InputMode::ball_inequality)
        for (int k = 0; k < K_; ++k)
            ineqs_.push_back({Inequality::Kind::input_ball, k, 0});
    if (std::isfinite(params_.u_z_min))
        for (int k = 0; k < K_; ++k)
            ineqs_.push_back({Inequality::Kind::input_floor, k, 0});

    mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ineqs_.size()));
    rho = kPenaltyInitial;
}

Vec3 MinTimeLagrangian::node_velocity(const Eigen::VectorXd &z, int node) const
{
    if (node == 0)
        return params_.v_start;
    if (node == M_ - 1)
        return params_.v_end;
    return z.segment<3>(v_off_ + 3 * (node - 1));
}

Vec3 MinTimeLagrangian::input(const Eigen::VectorXd &z, int interval) const
{
    if (mode_ == InputMode::sphere_equality)
    {
        const double th = z(theta_off_ + interval);
        const double ph = z(phi_off_ + interval);
        return params_.u_max *
               Vec3(std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph));
    }
    return z.segment<3>(u_off_ + 3 * interval);
}

double MinTimeLagrangian::value_and_gradient(const Eigen::VectorXd &z,
                                             Eigen::VectorXd &grad) const
{
    const int N = static_cast<int>(plan_->size());
    grad.setZero(dim_);

    Eigen::Matrix3Xd V(3, M_), U(3, K_);
    for (int j = 0; j < M_; ++j)
        V.col(j) = node_velocity(z, j);
    for (int k = 0; k < K_; ++k)
        U.col(k) = input(z, k);
    const auto s = z.segment(s_off_, K_);

    double f = s.squaredNorm();
    for (int k = 0; k < K_; ++k)
        grad(s_off_ + k) += 2.0 * s(k);

    // equality residuals: velocity recursion per interval, then one
    // displacement row per waypoint segment (positions eliminated)
    Eigen::VectorXd c(lambda.size());
    for (int k = 0; k < K_; ++k)
        c.segment<3>(3 * k) = V.col(k + 1) - V.col(k) - U.col(k) * (s(k) * s(k));
    for (int g = 0; g < N - 1; ++g)
        c.segment<3>(3 * K_ + 3 * g) = plan_->waypoints[g] - plan_->waypoints[g + 1];
    for (int k = 0; k < K_; ++k)
    {
        const double dt = s(k) * s(k);
        c.segment<3>(3 * K_ + 3 * (k / per_seg_)) += V.col(k) * dt + 0.5 * U.col(k) * dt * dt;
    }

    f += lambda.dot(c) + 0.5 * rho * c.squaredNorm();
    const Eigen::VectorXd adj = lambda + rho * c;

    Eigen::Matrix3Xd Gv = Eigen::Matrix3Xd::Zero(3, M_);
    Eigen::Matrix3Xd Gu = Eigen::Matrix3Xd::Zero(3, K_);
    for (int k = 0; k < K_; ++k)
    {
        const double sk = s(k), dt = sk * sk;
        const Vec3 a_dyn = adj.segment<3>(3 * k);
        const Vec3 a_seg = adj.segment<3>(3 * K_ + 3 * (k / per_seg_));
        Gv.col(k + 1) += a_dyn;
        Gv.col(k) -= a_dyn;
        Gv.col(k) += dt * a_seg;
        Gu.col(k) += -dt * a_dyn + 0.5 * dt * dt * a_seg;
        grad(s_off_ + k) += a_dyn.dot(-2.0 * sk * U.col(k)) +
                            a_seg.dot(2.0 * sk * V.col(k) + 2.0 * sk * dt * U.col(k));
    }

    // inequality terms: psi(g) = (max(0, mu + rho g)^2 - mu^2) / (2 rho)
    for (std::size_t i = 0; i < ineqs_.size(); ++i)
    {
        const Inequality &q = ineqs_[i];
        double gval = 0.0;
        switch (q.kind)
        {
        case Inequality::Kind::capture_speed:
            gval = V.col(q.index).squaredNorm() - params_.v_blur * params_.v_blur;
            break;
        case Inequality::Kind::box_upper:
            gval = V(q.axis, q.index) - params_.v_axis_max;
            break;
        case Inequality::Kind::box_lower:
            gval = -V(q.axis, q.index) - params_.v_axis_max;
            break;
        case Inequality::Kind::input_ball:
            gval = U.col(q.index).squaredNorm() - params_.u_max * params_.u_max;
            break;
        case Inequality::Kind::input_floor:
            gval = params_.u_z_min - U(2, q.index);
            break;
        }
        const double mult = std::max(0.0, mu(static_cast<Eigen::Index>(i)) + rho * gval);
        f += (mult * mult - mu(static_cast<Eigen::Index>(i)) * mu(static_cast<Eigen::Index>(i))) /
             (2.0 * rho);
        if (mult == 0.0)
            continue;
        switch (q.kind)
        {
        case Inequality::Kind::capture_speed:
            Gv.col(q.index) += 2.0 * mult * V.col(q.index);
            break;
        case Inequality::Kind::box_upper:
            Gv(q.axis, q.index) += mult;
            break;
        case Inequality::Kind::box_lower:
            Gv(q.axis, q.index) -= mult;
            break;
        case Inequality::Kind::input_ball:
            Gu.col(q.index) += 2.0 * mult * U.col(q.index);
            break;
        case Inequality::Kind::input_floor:
            Gu(2, q.index) -= mult;
            break;
        }
    }

    for (int j = 1; j <= M_ - 2; ++j)
        grad.segment<3>(v_off_ + 3 * (j - 1)) += Gv.col(j);

    if (mode_ == InputMode::sphere_equality)
    {
        for (int k = 0; k < K_; ++k)
        {
            const double th = z(theta_off_ + k), ph = z(phi_off_ + k);
            const double st = std::sin(th), ct = std::cos(th);
            const double sp = std::sin(ph), cp = std::cos(ph);
            const Vec3 du_dtheta = params_.u_max * Vec3(-sp * st, sp * ct, 0.0);
            const Vec3 du_dphi = params_.u_max * Vec3(cp * ct, cp * st, -sp);
            grad(theta_off_ + k) += Gu.col(k).dot(du_dtheta);
            grad(phi_off_ + k) += Gu.col(k).dot(du_dphi);
        }
    }
    else
    {
        for (int k = 0; k < K_; ++k)
            grad.segment<3>(u_off_ + 3 * k) += Gu.col(k);
    }
    return f;
}

void MinTimeLagrangian::constraints(const Eigen::VectorXd &z, Eigen::VectorXd &c_eq,
                                    Eigen::VectorXd &g_ineq) const
{
    const int N = static_cast<int>(plan_->size());
    Eigen::Matrix3Xd V(3, M_), U(3, K_);
    for (int j = 0; j < M_; ++j)
        V.col(j) = node_velocity(z, j);
    for (int k = 0; k < K_; ++k)
        U.col(k) = input(z, k);
    const auto s = z.segment(s_off_, K_);

    c_eq.resize(lambda.size());
    for (int k = 0; k < K_; ++k)
        c_eq.segment<3>(3 * k) = V.col(k + 1) - V.col(k) - U.col(k) * (s(k) * s(k));
    for (int g = 0; g < N - 1; ++g)
        c_eq.segment<3>(3 * K_ + 3 * g) = plan_->waypoints[g] - plan_->waypoints[g + 1];
    for (int k = 0; k < K_; ++k)
    {
        const double dt = s(k) * s(k);
        c_eq.segment<3>(3 * K_ + 3 * (k / per_seg_)) +=
            V.col(k) * dt + 0.5 * U.col(k) * dt * dt;
    }

    g_ineq.resize(static_cast<Eigen::Index>(ineqs_.size()));
    for (std::size_t i = 0; i < ineqs_.size(); ++i)
    {
        const Inequality &q = ineqs_[i];
        double gval = 0.0;
        switch (q.kind)
        {
        case Inequality::Kind::capture_speed:
            gval = V.col(q.index).squaredNorm() - params_.v_blur * params_.v_blur;
            break;
        case Inequality::Kind::box_upper:
            gval = V(q.axis, q.index) - params_.v_axis_max;
            break;
        case Inequality::Kind::box_lower:
            gval = -V(q.axis, q.index) - params_.v_axis_max;
            break;
        case Inequality::Kind::input_ball:
            gval = U.col(q.index).squaredNorm() - params_.u_max * params_.u_max;
            break;
        case Inequality::Kind::input_floor:
            gval = params_.u_z_min - U(2, q.index);
            break;
        }
        g_ineq(static_cast<Eigen::Index>(i)) = gval;
    }
}

double MinTimeLagrangian::objective(const Eigen::VectorXd &z) const
{
    return z.segment(s_off_, K_).squaredNorm();
}

Eigen::VectorXd MinTimeLagrangian::encode_warm_start(const ConicSolution &warm) const
{
    Eigen::VectorXd z = Eigen::VectorXd::Zero(dim_);
    const double s0 = std::sqrt(std::max(warm.dt, 0.0));
    for (int k = 0; k < K_; ++k)
    {
        z(s_off_ + k) = s0;
        if (mode_ == InputMode::sphere_equality)
        {
            const Vec3 &u = warm.u[static_cast<std::size_t>(k)];
            const double n = u.norm();
            if (n > 1e-9)
            {
                z(phi_off_ + k) = std::acos(std::clamp(u.z() / n, -1.0, 1.0));
                z(theta_off_ + k) = std::atan2(u.y(), u.x());
            }
            else
            {
                z(phi_off_ + k) = 0.5 * M_PI; // arbitrary horizontal direction
                z(theta_off_ + k) = 0.0;
            }
        }
        else
        {
            z.segment<3>(u_off_ + 3 * k) = warm.u[static_cast<std::size_t>(k)];
        }
    }
    for (int j = 1; j <= M_ - 2; ++j)
        z.segment<3>(v_off_ + 3 * (j - 1)) = warm.v[static_cast<std::size_t>(j)];
    return z;
}

NodeSolution MinTimeLagrangian::decode(const Eigen::VectorXd &z) const
{
    NodeSolution out;
    out.mode = mode_;
    out.switching_points = per_seg_ - 1;
    out.dt.resize(static_cast<std::size_t>(K_));
    out.u.resize(static_cast<std::size_t>(K_));
    out.v.resize(static_cast<std::size_t>(M_));
    out.r.resize(static_cast<std::size_t>(M_));

    for (int k = 0; k < K_; ++k)
    {
        double dt = z(s_off_ + k) * z(s_off_ + k);
        if (dt <= params_.eps_time)
            dt = 0.0; // snap vanished intervals exactly to zero
        out.dt[static_cast<std::size_t>(k)] = dt;
        out.u[static_cast<std::size_t>(k)] = input(z, k);
    }
    for (int j = 0; j < M_; ++j)
        out.v[static_cast<std::size_t>(j)] = node_velocity(z, j);

    out.r[0] = plan_->waypoints.front();
    for (int k = 0; k < K_; ++k)
    {
        const double dt = out.dt[static_cast<std::size_t>(k)];
        out.r[static_cast<std::size_t>(k + 1)] =
            out.r[static_cast<std::size_t>(k)] + out.v[static_cast<std::size_t>(k)] * dt +
            0.5 * out.u[static_cast<std::size_t>(k)] * dt * dt;
    }
    out.total_time = 0.0;
    for (double dt : out.dt)
        out.total_time += dt;
    return out;
}

namespace
{

/// Outer multiplier loop shared by both input modes. Drives the constraint
/// violation below a target tightened with the waypoint count, because
/// per-segment displacement defects accumulate along the reconstructed path.
NodeSolution run_outer_loop(MinTimeLagrangian &model, Eigen::VectorXd z,
                            const PlannerParams &params, int waypoints, bool &feasible_out)
{
    const double theta_feas = params.eps_feas;
    const double theta_target = std::clamp(
        params.eps_feas / (std::sqrt(3.0) * std::max(1, waypoints - 1)), 1e-10, theta_feas);
    const double tight_grad = std::min(1e-8, 0.1 * params.eps_opt);

    struct OuterRecord
    {
        double theta, f, station;
        Eigen::VectorXd z;
    };
    std::vector<OuterRecord> records;

    double theta_prev = kInf;
    int inner_total = 0;
    int outer_used = 0;
    Eigen::VectorXd c, g;

    for (int outer = 0; outer < kMaxOuter; ++outer)
    {
        outer_used = outer + 1;
        qn::Options qo;
        qo.grad_tol = std::clamp(0.1 * theta_prev, tight_grad, 1e-4);
        qo.max_iterations = 4000;
        auto inner = qn::minimize(
            [&model](const Eigen::VectorXd &x, Eigen::VectorXd &grad) {
                return model.value_and_gradient(x, grad);
            },
            std::move(z), qo);
        z = std::move(inner.x);
        inner_total += inner.iterations;

        model.constraints(z, c, g);
        const double theta = std::max(inf_norm(c), positive_max(g));
        const double station = inf_norm(inner.grad);
        records.push_back({theta, model.objective(z), station, z});

        if (theta <= theta_target && station <= params.eps_opt)
            break;

        model.lambda += model.rho * c;
        model.mu = (model.mu + model.rho * g).cwiseMax(0.0);
        if (theta > 0.25 * theta_prev && theta > theta_target)
            model.rho = std::min(model.rho * kPenaltyGrowth, kPenaltyMax);
        theta_prev = theta;
    }

    // prefer iterates inside the tight band; fall back to the loose one
    double band = theta_target;
    bool any = false;
    for (const auto &rec : records)
        any = any || rec.theta <= band;
    if (!any)
        band = theta_feas;

    const OuterRecord *chosen = nullptr;
    std::vector<double> accepted;
    for (const auto &rec : records)
    {
        if (rec.theta > band)
            continue;
        if (chosen == nullptr || rec.f <= chosen->f)
        {
            chosen = &rec;
            accepted.push_back(rec.f);
        }
    }

    feasible_out = chosen != nullptr;
    NodeSolution sol = model.decode(chosen != nullptr ? chosen->z : z);
    if (chosen != nullptr)
    {
        sol.constraint_violation = chosen->theta;
        sol.stationarity = chosen->station;
        sol.converged = chosen->theta <= theta_feas && chosen->station <= params.eps_opt;
    }
    else if (!records.empty())
    {
        sol.constraint_violation = records.back().theta;
        sol.stationarity = records.back().station;
    }
    sol.outer_iterations = outer_used;
    sol.inner_iterations = inner_total;
    sol.accepted_objectives = std::move(accepted);
    return sol;
}

void check_warm_dimensions(const SurveyPlan &plan, const PlannerParams &params,
                           const ConicSolution &warm)
{
    const int N = static_cast<int>(plan.size());
    const int K = params.intervals_per_segment() * (N - 1);
    const int M = K + 1;
    if (static_cast<int>(warm.u.size()) != K || static_cast<int>(warm.v.size()) != M)
        throw InvalidWarmStartError("warm-start dimensions do not match the plan");
    if (!(warm.dt > 0.0))
        throw InvalidWarmStartError("warm-start step must be positive");
}

} // namespace

NodeSolution solve_min_time(const SurveyPlan &plan, const PlannerParams &params,
                            const ConicSolution &warm)
{
    plan.validate();
    params.validate();
    check_boundary_state(params);
    check_warm_dimensions(plan, params, warm);

    MinTimeLagrangian model(plan, params, InputMode::sphere_equality);
    bool feasible = false;
    NodeSolution sol = run_outer_loop(model, model.encode_warm_start(warm), params,
                                      static_cast<int>(plan.size()), feasible);
    sol.warm_dt_star = warm.dt;
    sol.warm_start_makespan = model.num_intervals() * warm.dt;
    if (!feasible)
        throw FallbackNeededError(
            "sphere-equality solve did not reach a feasible point; retry relaxed");
    return sol;
}

NodeSolution solve_relaxed_fallback(const SurveyPlan &plan, const PlannerParams &params,
                                    const ConicSolution &warm)
{
    plan.validate();
    params.validate();
    check_boundary_state(params);

    const int base_s = params.switching_points;
    NodeSolution last_attempt;
    bool have_attempt = false;

    for (int s_try = base_s + 1; s_try <= kFallbackMaxSwitching; ++s_try)
    {
        PlannerParams relaxed = params;
        relaxed.switching_points = s_try;

        // fresh fixed-step warm start at the finer grid; scale the previous
        // step so the initial bracket covers the same per-segment duration
        const double hint =
            warm.dt > 0.0
                ? warm.dt * static_cast<double>(params.intervals_per_segment()) /
                      relaxed.intervals_per_segment()
                : 0.1;
        double hi = std::max(2.0 * hint, 1e-3);
        LineSearchResult ls;
        bool bracketed = false;
        for (int grow = 0; grow < 8 && !bracketed; ++grow, hi *= 2.0)
        {
            try
            {
                ls = line_search_dt(plan, relaxed, 1e-4 * hi, hi,
                                    std::max(1e-6, 1e-4 * hi));
                bracketed = true;
            }
            catch (const InfeasibleError &)
            {
            }
        }
        if (!bracketed)
            continue;

        MinTimeLagrangian model(plan, relaxed, InputMode::ball_inequality);
        bool feasible = false;
        NodeSolution sol = run_outer_loop(model, model.encode_warm_start(ls.solution),
                                          relaxed, static_cast<int>(plan.size()), feasible);
        sol.fallback_attempts = s_try - base_s;
        sol.warm_dt_star = ls.dt_star;
        sol.warm_start_makespan = model.num_intervals() * ls.dt_star;
        if (feasible)
            return sol;
        last_attempt = std::move(sol);
        have_attempt = true;
    }

    std::ostringstream msg;
    msg << "minimum-time solve infeasible up to " << kFallbackMaxSwitching
        << " switching points per segment";
    if (have_attempt)
    {
        const NlpResiduals res = evaluate_residuals(last_attempt, plan, params);
        msg << "; violated families:";
        if (res.dynamics > params.eps_feas)
            msg << " dynamics(" << res.dynamics << ")";
        if (res.waypoint > params.eps_feas)
            msg << " waypoint(" << res.waypoint << ")";
        if (res.blur > params.eps_feas)
            msg << " blur(" << res.blur << ")";
        if (res.sphere > params.eps_feas)
            msg << " input(" << res.sphere << ")";
        if (res.axis_box > params.eps_feas)
            msg << " axis-box(" << res.axis_box << ")";
        if (res.boundary > params.eps_feas)
            msg << " boundary(" << res.boundary << ")";
    }
    throw InfeasibleError(msg.str());
}

NlpResiduals evaluate_residuals(const NodeSolution &sol, const SurveyPlan &plan,
                                const PlannerParams &params)
{
    NlpResiduals out;
    const int K = static_cast<int>(sol.dt.size());
    const int M = static_cast<int>(sol.v.size());
    const int N = static_cast<int>(plan.size());
    const int per_seg = sol.switching_points + 1;
    out.dynamics_per_interval.assign(static_cast<std::size_t>(K), 0.0);

    for (int k = 0; k < K; ++k)
    {
        const double dt = sol.dt[static_cast<std::size_t>(k)];
        const Vec3 dv = sol.v[static_cast<std::size_t>(k + 1)] -
                        sol.v[static_cast<std::size_t>(k)] -
                        sol.u[static_cast<std::size_t>(k)] * dt;
        const Vec3 dr = sol.r[static_cast<std::size_t>(k + 1)] -
                        sol.r[static_cast<std::size_t>(k)] -
                        sol.v[static_cast<std::size_t>(k)] * dt -
                        0.5 * sol.u[static_cast<std::size_t>(k)] * dt * dt;
        const double defect =
            std::max(dv.cwiseAbs().maxCoeff(), dr.cwiseAbs().maxCoeff());
        out.dynamics_per_interval[static_cast<std::size_t>(k)] = defect;
        out.dynamics = std::max(out.dynamics, defect);
    }

    for (int n = 1; n <= N; ++n)
    {
        const int j = per_seg * (n - 1);
        if (j < 0 || j >= M)
            continue;
        out.waypoint = std::max(out.waypoint, (sol.r[static_cast<std::size_t>(j)] -
                                               plan.waypoints[static_cast<std::size_t>(n - 1)])
                                                  .norm());
        if (std::isfinite(params.v_blur))
            out.blur = std::max(out.blur,
                                sol.v[static_cast<std::size_t>(j)].norm() - params.v_blur);
    }
    out.blur = std::max(out.blur, 0.0);

    for (int k = 0; k < K; ++k)
    {
        const double n = sol.u[static_cast<std::size_t>(k)].norm();
        if (sol.mode == InputMode::sphere_equality)
        {
            if (sol.dt[static_cast<std::size_t>(k)] > params.eps_time)
                out.sphere = std::max(out.sphere, std::abs(n - params.u_max));
        }
        else
        {
            out.sphere = std::max(out.sphere, n - params.u_max);
        }
    }
    out.sphere = std::max(out.sphere, 0.0);

    if (std::isfinite(params.v_axis_max))
        for (int j = 0; j < M; ++j)
            out.axis_box =
                std::max(out.axis_box, sol.v[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() -
                                           params.v_axis_max);
    out.axis_box = std::max(out.axis_box, 0.0);

    if (M > 0)
        out.boundary = std::max(
            (sol.v.front() - params.v_start).cwiseAbs().maxCoeff(),
            (sol.v.back() - params.v_end).cwiseAbs().maxCoeff());
    return out;
}

NodeSolution plan_min_time(const SurveyPlan &plan, const PlannerParams &params)
{
    plan.validate();
    params.validate();
    check_boundary_state(params);

    // bracket the fixed-step search from a per-axis rest-to-rest time bound
    const double axis_acc = params.u_max / std::sqrt(3.0);
    double worst_segment = 0.0;
    for (std::size_t g = 0; g + 1 < plan.size(); ++g)
    {
        const Vec3 d = plan.waypoints[g + 1] - plan.waypoints[g];
        for (int a = 0; a < 3; ++a)
        {
            const double dist = std::abs(d(a));
            if (dist <= 0.0)
                continue;
            double t = 2.0 * std::sqrt(dist / axis_acc);
            if (std::isfinite(params.v_axis_max) &&
                std::sqrt(dist * axis_acc) > params.v_axis_max)
                t = dist / params.v_axis_max + params.v_axis_max / axis_acc;
            worst_segment = std::max(worst_segment, t);
        }
    }

    double hi = std::max(worst_segment / params.intervals_per_segment(), 1e-3);
    LineSearchResult ls;
    bool bracketed = false;
    for (int grow = 0; grow < 8; ++grow, hi *= 2.0)
    {
        try
        {
            ls = line_search_dt(plan, params, 1e-4 * hi, hi, std::max(1e-6, 1e-4 * hi));
            bracketed = true;
            break;
        }
        catch (const InfeasibleError &)
        {
            if (grow == 7)
                throw;
        }
    }
    if (!bracketed)
        throw InfeasibleError("fixed-step relaxation infeasible at every bracket");

    try
    {
        return solve_min_time(plan, params, ls.solution);
    }
    catch (const FallbackNeededError &)
    {
        return solve_relaxed_fallback(plan, params, ls.solution);
    }
}

} // namespace aerosurvey
