#ifndef AEROSURVEY_QUASI_NEWTON_HPP
#define AEROSURVEY_QUASI_NEWTON_HPP

#include <Eigen/Core>

#include <cmath>
#include <deque>
#include <limits>
#include <utility>

namespace aerosurvey::qn
{

struct Options
{
    int memory = 10;
    int max_iterations = 2000;
    double grad_tol = 1e-9;      // stop when ||grad||_inf falls below
    double step_tol = 1e-14;     // stop when the line search stalls
    double c1 = 1e-4;            // sufficient-decrease constant
    double c2 = 0.9;             // curvature constant
    double approx_wolfe_eps = 1e-12; // f-flatness threshold for slope-only acceptance
    int max_line_search = 60;
};

struct Result
{
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd grad;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracket + zoom with
/// cubic interpolation). The functor computes f(x) and writes grad(x).
template <typename F>
Result minimize(F &&fg, Eigen::VectorXd x0, const Options &opt = Options())
{
    using Eigen::VectorXd;
    const auto dim = x0.size();

    Result res;
    res.x = std::move(x0);
    res.grad.resize(dim);
    res.f = fg(res.x, res.grad);
    res.evaluations = 1;

    std::deque<std::pair<VectorXd, VectorXd>> pairs; // (s, y)
    VectorXd direction(dim), x_new(dim), g_new(dim);

    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations)
    {
        if (res.grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol)
        {
            res.converged = true;
            return res;
        }

        // two-loop recursion
        direction = -res.grad;
        const int k = static_cast<int>(pairs.size());
        Eigen::VectorXd alpha_mem(k);
        for (int i = k - 1; i >= 0; --i)
        {
            const auto &[s, y] = pairs[i];
            alpha_mem(i) = s.dot(direction) / s.dot(y);
            direction -= alpha_mem(i) * y;
        }
        if (k > 0)
        {
            const auto &[s, y] = pairs.back();
            direction *= s.dot(y) / y.squaredNorm();
        }
        for (int i = 0; i < k; ++i)
        {
            const auto &[s, y] = pairs[i];
            direction += (alpha_mem(i) - y.dot(direction) / s.dot(y)) * s;
        }

        double dg = direction.dot(res.grad);
        if (dg >= 0.0)
        { // fall back to steepest descent if curvature info went bad
            direction = -res.grad;
            dg = -res.grad.squaredNorm();
            pairs.clear();
        }

        // strong Wolfe line search
        const double f0 = res.f;
        const double dg0 = dg;
        double lo = 0.0, hi = 0.0;
        double f_lo = f0, dg_lo = dg0;
        double step = 1.0;
        double f_prev = f0, dg_prev = dg0, step_prev = 0.0;
        bool bracketed = false, done = false;
        double f_trial = f0, dg_trial = dg0;

        const double f_flat = opt.approx_wolfe_eps * (std::abs(f0) + 1.0);
        for (int ls = 0; ls < opt.max_line_search; ++ls)
        {
            x_new = res.x + step * direction;
            f_trial = fg(x_new, g_new);
            ++res.evaluations;
            dg_trial = g_new.dot(direction);

            // Approximate Wolfe acceptance: once objective differences are lost
            // to roundoff, the slope conditions alone certify the step.
            if (f_trial <= f0 + f_flat && dg_trial <= (2.0 * opt.c1 - 1.0) * dg0 &&
                std::abs(dg_trial) <= -opt.c2 * dg0)
            {
                done = true;
                break;
            }

            if (!bracketed)
            {
                if (f_trial > f0 + opt.c1 * step * dg0 || (ls > 0 && f_trial >= f_prev))
                {
                    lo = step_prev;
                    f_lo = f_prev;
                    dg_lo = dg_prev;
                    hi = step;
                    bracketed = true;
                }
                else if (std::abs(dg_trial) <= -opt.c2 * dg0)
                {
                    done = true;
                    break;
                }
                else if (dg_trial >= 0.0)
                {
                    lo = step;
                    f_lo = f_trial;
                    dg_lo = dg_trial;
                    hi = step_prev;
                    bracketed = true;
                }
                else
                {
                    step_prev = step;
                    f_prev = f_trial;
                    dg_prev = dg_trial;
                    step *= 2.0;
                    continue;
                }
            }
            else
            {
                if (f_trial > f0 + opt.c1 * step * dg0 || f_trial >= f_lo)
                {
                    hi = step;
                }
                else
                {
                    if (std::abs(dg_trial) <= -opt.c2 * dg0)
                    {
                        done = true;
                        break;
                    }
                    if (dg_trial * (hi - lo) >= 0.0)
                        hi = lo;
                    lo = step;
                    f_lo = f_trial;
                    dg_lo = dg_trial;
                }
            }
            // zoom step: bisect (guarded cubic would also work; bisection is
            // robust and the evaluation count is not critical here)
            if (std::abs(hi - lo) <= opt.step_tol * std::max(1.0, std::abs(lo)))
            {
                done = f_trial < f0;
                break;
            }
            step = 0.5 * (lo + hi);
        }

        if (!done && !(f_trial < f0))
        {
            // no acceptable step; give up at the current point
            return res;
        }

        // curvature update
        const VectorXd s = x_new - res.x;
        const VectorXd y = g_new - res.grad;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm())
        {
            pairs.emplace_back(s, y);
            if (static_cast<int>(pairs.size()) > opt.memory)
                pairs.pop_front();
        }
        res.x.swap(x_new);
        res.f = f_trial;
        res.grad.swap(g_new);
    }
    res.converged = res.grad.lpNorm<Eigen::Infinity>() <= opt.grad_tol;
    return res;
}

} // namespace aerosurvey::qn

#endif
