#include "aerosurvey/socp_relaxation.hpp"

#include <algorithm>
#include <cmath>

namespace aerosurvey
{

const char *to_string(SocpStatus status)
{
    switch (status)
    {
    case SocpStatus::optimal:
        return "optimal";
    case SocpStatus::infeasible:
        return "infeasible";
    case SocpStatus::max_iter:
        return "max-iter";
    }
    return "unknown";
}

double SocpResiduals::max_violation() const
{
    return std::max({dynamics, waypoint, boundary, axis_box, input_cone, input_cap,
                     capture_speed});
}

ConicProblem build_socp(const SurveyPlan &plan, const PlannerParams &params, double dt)
{
    plan.validate();
    params.validate();
    if (plan.size() < 2)
        throw InvalidParameterError("survey plan needs at least two waypoints");
    if (!(dt > 0.0))
        throw InvalidParameterError("common step dt must be positive");

    const int N = static_cast<int>(plan.size());
    const int S = params.switching_points;
    const int per_seg = S + 1;
    const int K = per_seg * (N - 1);
    const int M = K + 1;

    ConicProblem out;
    out.num_waypoints = N;
    out.switching_points = S;
    out.num_nodes = M;
    out.num_intervals = K;
    out.dt = dt;
    out.capture_speed_limit = std::min(params.v_axis_max, params.v_blur);

    conic::Problem &cp = out.cone_data;
    cp.n = 3 * M + 4 * K;
    cp.c = Eigen::VectorXd::Zero(cp.n);
    for (int k = 0; k < K; ++k)
        cp.c(out.sigma_index(k)) = 1.0;

    // --- equalities ---------------------------------------------------------
    // velocity recursion (3K), segment displacement (3(N-1)), boundary (6)
    const int p = 3 * K + 3 * (N - 1) + 6;
    cp.b = Eigen::VectorXd::Zero(p);
    int row = 0;
    for (int k = 0; k < K; ++k)
        for (int a = 0; a < 3; ++a)
        {
            cp.A_entries.push_back({row, out.v_index(k + 1, a), 1.0});
            cp.A_entries.push_back({row, out.v_index(k, a), -1.0});
            cp.A_entries.push_back({row, out.u_index(k, a), -dt});
            cp.b(row) = 0.0;
            ++row;
        }
    for (int seg = 0; seg < N - 1; ++seg)
    {
        const Vec3 delta = plan.waypoints[seg + 1] - plan.waypoints[seg];
        for (int a = 0; a < 3; ++a)
        {
            for (int k = seg * per_seg; k < (seg + 1) * per_seg; ++k)
            {
                cp.A_entries.push_back({row, out.v_index(k, a), dt});
                cp.A_entries.push_back({row, out.u_index(k, a), 0.5 * dt * dt});
            }
            cp.b(row) = delta(a);
            ++row;
        }
    }
    for (int a = 0; a < 3; ++a)
    {
        cp.A_entries.push_back({row, out.v_index(0, a), 1.0});
        cp.b(row) = params.v_start(a);
        ++row;
        cp.A_entries.push_back({row, out.v_index(M - 1, a), 1.0});
        cp.b(row) = params.v_end(a);
        ++row;
    }

    // --- cones --------------------------------------------------------------
    std::vector<double> h;
    int cone_row = 0;
    const bool boxed = !is_unbounded(params.v_axis_max);
    if (boxed)
        for (int j = 0; j < M; ++j)
            for (int a = 0; a < 3; ++a)
            {
                cp.G_entries.push_back({cone_row, out.v_index(j, a), 1.0});
                h.push_back(params.v_axis_max);
                ++cone_row;
                cp.G_entries.push_back({cone_row, out.v_index(j, a), -1.0});
                h.push_back(params.v_axis_max);
                ++cone_row;
            }
    cp.n_lp = cone_row;

    auto add_norm_cone = [&](double head_limit, int head_var, auto var_of_axis) {
        // s = (head, tail) with head = head_limit - [head_var] and
        // tail_a = [var(a)]; encodes ||tail|| <= head.
        if (head_var >= 0)
            cp.G_entries.push_back({cone_row, head_var, -1.0});
        h.push_back(head_limit);
        ++cone_row;
        for (int a = 0; a < 3; ++a)
        {
            cp.G_entries.push_back({cone_row, var_of_axis(a), -1.0});
            h.push_back(0.0);
            ++cone_row;
        }
        cp.soc_dims.push_back(4);
    };

    for (int k = 0; k < K; ++k)
        add_norm_cone(0.0, out.sigma_index(k), [&](int a) { return out.u_index(k, a); });
    for (int k = 0; k < K; ++k)
        add_norm_cone(params.u_max, -1, [&](int a) { return out.u_index(k, a); });
    if (!is_unbounded(out.capture_speed_limit))
        for (int n = 1; n <= N; ++n)
        {
            const int j = out.waypoint_node(n);
            add_norm_cone(out.capture_speed_limit, -1,
                          [&](int a) { return out.v_index(j, a); });
        }

    cp.h = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<long>(h.size()));
    return out;
}

ConicSolution solve_socp(const ConicProblem &problem)
{
    conic::Settings settings;
    const conic::Solution raw = conic::solve(problem.cone_data, settings);

    ConicSolution out;
    out.dt = problem.dt;
    out.iterations = raw.iterations;
    out.detail = conic::to_string(raw.status);

    switch (raw.status)
    {
    case conic::SolveStatus::optimal:
        out.status = SocpStatus::optimal;
        break;
    case conic::SolveStatus::primal_infeasible:
        out.status = SocpStatus::infeasible;
        return out;
    default:
        out.status = SocpStatus::max_iter;
        return out;
    }

    const int M = problem.num_nodes;
    const int K = problem.num_intervals;
    out.v.resize(M);
    out.u.resize(K);
    out.sigma.resize(K);
    for (int j = 0; j < M; ++j)
        for (int a = 0; a < 3; ++a)
            out.v[j](a) = raw.x(problem.v_index(j, a));
    // sigma_k is free upwards, so snapping it to ||u_k|| repairs any residual
    // slack-cone violation exactly; the objective moves by less than the gap
    // tolerance
    out.objective = 0.0;
    for (int k = 0; k < K; ++k)
    {
        for (int a = 0; a < 3; ++a)
            out.u[k](a) = raw.x(problem.u_index(k, a));
        out.sigma[k] = std::max(raw.x(problem.sigma_index(k)), out.u[k].norm());
        out.objective += out.sigma[k];
    }

    // the cone program carries displacements only; integrate positions back
    out.r.resize(M);
    const double dt = problem.dt;
    out.r[0] = Vec3::Zero();
    for (int k = 0; k < K; ++k)
        out.r[k + 1] = out.r[k] + out.v[k] * dt + 0.5 * out.u[k] * dt * dt;

    // downgrade if the solver's claim fails an independent feasibility check;
    // tolerances are relative to the data magnitude of each constraint family.
    // The check runs on the repaired point (lifted sigma included).
    Eigen::VectorXd repaired = raw.x;
    for (int k = 0; k < K; ++k)
        repaired(problem.sigma_index(k)) = out.sigma[k];
    const auto res = conic::check_residuals(problem.cone_data, repaired);
    const double eq_scale =
        1.0 + (problem.cone_data.b.size() > 0
                   ? problem.cone_data.b.cwiseAbs().maxCoeff()
                   : 0.0);
    const double cone_scale =
        1.0 + (problem.cone_data.h.size() > 0
                   ? problem.cone_data.h.cwiseAbs().maxCoeff()
                   : 0.0);
    if (res.eq_violation > 1e-7 * eq_scale || res.cone_violation > 1e-7 * cone_scale)
    {
        out.status = SocpStatus::max_iter;
        out.detail = "solution failed the independent residual check";
    }
    return out;
}

SocpResiduals evaluate_socp_residuals(const SurveyPlan &plan, const PlannerParams &params,
                                      const ConicSolution &solution)
{
    SocpResiduals res;
    const int K = static_cast<int>(solution.u.size());
    const int N = static_cast<int>(plan.size());
    const double dt = solution.dt;

    for (int k = 0; k < K; ++k)
    {
        const Vec3 defect = solution.v[k + 1] - solution.v[k] - solution.u[k] * dt;
        res.dynamics = std::max(res.dynamics, defect.cwiseAbs().maxCoeff());
    }

    // rebuild positions from the first waypoint and compare at capture nodes
    const int per_seg = K / (N - 1);
    std::vector<Vec3> r(K + 1);
    r[0] = plan.waypoints.front();
    for (int k = 0; k < K; ++k)
        r[k + 1] = r[k] + solution.v[k] * dt + 0.5 * solution.u[k] * dt * dt;
    for (int n = 0; n < N; ++n)
    {
        const Vec3 err = r[n * per_seg] - plan.waypoints[n];
        res.waypoint = std::max(res.waypoint, err.norm());
    }

    res.boundary = std::max((solution.v.front() - params.v_start).cwiseAbs().maxCoeff(),
                            (solution.v.back() - params.v_end).cwiseAbs().maxCoeff());

    if (!is_unbounded(params.v_axis_max))
        for (const Vec3 &v : solution.v)
            res.axis_box =
                std::max(res.axis_box, (v.cwiseAbs().array() - params.v_axis_max).maxCoeff());

    for (int k = 0; k < K; ++k)
    {
        res.input_cone = std::max(res.input_cone, solution.u[k].norm() - solution.sigma[k]);
        res.input_cap = std::max(res.input_cap, solution.u[k].norm() - params.u_max);
    }

    const double cap = std::min(params.v_axis_max, params.v_blur);
    if (!is_unbounded(cap))
        for (int n = 0; n < N; ++n)
            res.capture_speed =
                std::max(res.capture_speed, solution.v[n * per_seg].norm() - cap);

    return res;
}

LineSearchResult line_search_dt(const SurveyPlan &plan, const PlannerParams &params,
                                double dt_lo, double dt_hi, double tol_dt)
{
    if (!(dt_lo >= 0.0) || !(dt_hi > dt_lo))
        throw InvalidParameterError("line search needs 0 <= dt_lo < dt_hi");
    if (!(tol_dt > 0.0))
        throw InvalidParameterError("line search tolerance must be positive");

    constexpr int kMaxBisections = 60;
    LineSearchResult out;

    auto attempt = [&](double dt) {
        ++out.socp_solves;
        return solve_socp(build_socp(plan, params, dt));
    };

    // a feasible floor ends the search immediately (degenerate plans)
    if (dt_lo > 0.0)
    {
        ConicSolution at_lo = attempt(dt_lo);
        if (at_lo.status == SocpStatus::optimal)
        {
            out.dt_star = dt_lo;
            out.solution = std::move(at_lo);
            return out;
        }
    }

    ConicSolution best = attempt(dt_hi);
    if (best.status != SocpStatus::optimal)
        throw InfeasibleError(
            "no feasible common step at the bracket top; widen the bracket or add "
            "switching points");

    double lo = dt_lo, hi = dt_hi;
    while (hi - lo > tol_dt && out.bisection_iterations < kMaxBisections)
    {
        ++out.bisection_iterations;
        const double mid = 0.5 * (lo + hi);
        ConicSolution at_mid = attempt(mid);
        // non-optimal statuses count as infeasible so dt_star stays on the
        // side proven feasible
        if (at_mid.status == SocpStatus::optimal)
        {
            hi = mid;
            best = std::move(at_mid);
        }
        else
        {
            lo = mid;
        }
    }
    out.dt_star = hi;
    out.solution = std::move(best);
    return out;
}

} // namespace aerosurvey
