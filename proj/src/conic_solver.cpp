#include "aerosurvey/conic_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

namespace aerosurvey::conic
{

namespace
{

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kSafeguard = 500.0;     // divergence guard on the primal residual
constexpr double kLinsysAccuracy = 1e-14; // target accuracy of refined KKT solves

// --- products with entry lists --------------------------------------------

// out += coeff * M * x
template <typename Out>
void add_product(const std::vector<Entry> &entries, const VectorXd &x, double coeff, Out &&out)
{
    for (const Entry &e : entries)
        out(e.row) += coeff * e.value * x(e.col);
}

// out += coeff * M' * y
template <typename Out>
void add_tproduct(const std::vector<Entry> &entries, const VectorXd &y, double coeff, Out &&out)
{
    for (const Entry &e : entries)
        out(e.col) += coeff * e.value * y(e.row);
}

struct SocIndex
{
    int start = 0; // row offset into the cone variables (LP block first)
    int dim = 0;
};

// --- Nesterov-Todd scalings ------------------------------------------------

struct Scalings
{
    VectorXd w_lp;    // per LP row, w = sqrt(s/z)
    VectorXd w_lp_sq; // w^2
    std::vector<double> eta_sq;
    std::vector<VectorXd> wbar;
    VectorXd lambda; // scaled point, lambda = W z

    void resize(int n_lp, const std::vector<SocIndex> &socs, int m)
    {
        w_lp.resize(n_lp);
        w_lp_sq.resize(n_lp);
        eta_sq.assign(socs.size(), 1.0);
        wbar.resize(socs.size());
        for (std::size_t i = 0; i < socs.size(); ++i)
        {
            wbar[i] = VectorXd::Zero(socs[i].dim);
            wbar[i](0) = 1.0;
        }
        lambda.resize(m);
    }

    void set_identity(int n_lp, const std::vector<SocIndex> &socs, int m)
    {
        resize(n_lp, socs, m);
        w_lp.setOnes();
        w_lp_sq.setOnes();
        lambda.setZero();
    }
};

bool update_scalings(const VectorXd &s, const VectorXd &z, int n_lp,
                     const std::vector<SocIndex> &socs, Scalings &sc)
{
    for (int i = 0; i < n_lp; ++i)
    {
        if (s(i) <= 0.0 || z(i) <= 0.0)
            return false;
        sc.w_lp(i) = std::sqrt(s(i) / z(i));
        sc.w_lp_sq(i) = sc.w_lp(i) * sc.w_lp(i);
        sc.lambda(i) = std::sqrt(s(i) * z(i));
    }
    for (std::size_t k = 0; k < socs.size(); ++k)
    {
        const int r0 = socs[k].start;
        const int q = socs[k].dim;
        const auto sk = s.segment(r0, q);
        const auto zk = z.segment(r0, q);

        const double sres = sk(0) * sk(0) - sk.tail(q - 1).squaredNorm();
        const double zres = zk(0) * zk(0) - zk.tail(q - 1).squaredNorm();
        if (sres <= 0.0 || zres <= 0.0)
            return false;
        const double snorm = std::sqrt(sres);
        const double znorm = std::sqrt(zres);

        const VectorXd sbar = sk / snorm;
        const VectorXd zbar = zk / znorm;
        const double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));

        VectorXd &w = sc.wbar[k];
        w(0) = (0.5 / gamma) * (sbar(0) + zbar(0));
        w.tail(q - 1) = (0.5 / gamma) * (sbar.tail(q - 1) - zbar.tail(q - 1));

        sc.eta_sq[k] = snorm / znorm;
        const double eta = std::sqrt(sc.eta_sq[k]);

        // lambda = W z
        const double zeta = w.tail(q - 1).dot(zk.tail(q - 1));
        sc.lambda(r0) = eta * (w(0) * zk(0) + zeta);
        sc.lambda.segment(r0 + 1, q - 1) =
            eta * (zk.tail(q - 1) + (zk(0) + zeta / (1.0 + w(0))) * w.tail(q - 1));
    }
    return true;
}

// out = W v
void scale(const Scalings &sc, int n_lp, const std::vector<SocIndex> &socs,
           const VectorXd &v, VectorXd &out)
{
    out.head(n_lp) = sc.w_lp.cwiseProduct(v.head(n_lp));
    for (std::size_t k = 0; k < socs.size(); ++k)
    {
        const int r0 = socs[k].start;
        const int q = socs[k].dim;
        const VectorXd &w = sc.wbar[k];
        const double eta = std::sqrt(sc.eta_sq[k]);
        const auto vk = v.segment(r0, q);
        const double zeta = w.tail(q - 1).dot(vk.tail(q - 1));
        out(r0) = eta * (w(0) * vk(0) + zeta);
        out.segment(r0 + 1, q - 1) =
            eta * (vk.tail(q - 1) + (vk(0) + zeta / (1.0 + w(0))) * w.tail(q - 1));
    }
}

// out = u o v (Jordan product)
void conic_product(int n_lp, const std::vector<SocIndex> &socs, const VectorXd &u,
                   const VectorXd &v, VectorXd &out)
{
    out.head(n_lp) = u.head(n_lp).cwiseProduct(v.head(n_lp));
    for (const SocIndex &c : socs)
    {
        const auto uk = u.segment(c.start, c.dim);
        const auto vk = v.segment(c.start, c.dim);
        out(c.start) = uk.dot(vk);
        out.segment(c.start + 1, c.dim - 1) =
            uk(0) * vk.tail(c.dim - 1) + vk(0) * uk.tail(c.dim - 1);
    }
}

// out = u \ w (inverse Jordan product)
void conic_division(int n_lp, const std::vector<SocIndex> &socs, const VectorXd &u,
                    const VectorXd &w, VectorXd &out)
{
    out.head(n_lp) = w.head(n_lp).cwiseQuotient(u.head(n_lp));
    for (const SocIndex &c : socs)
    {
        const int q = c.dim;
        const auto uk = u.segment(c.start, q);
        const auto wk = w.segment(c.start, q);
        const double rho = uk(0) * uk(0) - uk.tail(q - 1).squaredNorm();
        const double zeta = uk.tail(q - 1).dot(wk.tail(q - 1));
        out(c.start) = (uk(0) * wk(0) - zeta) / rho;
        out.segment(c.start + 1, q - 1) =
            ((zeta / uk(0) - wk(0)) / rho) * uk.tail(q - 1) + wk.tail(q - 1) / uk(0);
    }
}

// Move a point into the interior of the cone by shifting along the unit element.
void bring_to_cone(int n_lp, const std::vector<SocIndex> &socs, double margin, VectorXd &r)
{
    double alpha = -margin;
    for (int i = 0; i < n_lp; ++i)
        if (r(i) <= 0.0 && -r(i) > alpha)
            alpha = -r(i);
    for (const SocIndex &c : socs)
    {
        const double cres = r(c.start) - r.segment(c.start + 1, c.dim - 1).norm();
        if (cres <= 0.0 && -cres > alpha)
            alpha = -cres;
    }
    alpha += 1.0;
    r.head(n_lp).array() += alpha;
    for (const SocIndex &c : socs)
        r(c.start) += alpha;
}

// Largest step to the cone boundary, evaluated in the scaled (lambda) space.
double line_search(const VectorXd &lambda, const VectorXd &ds, const VectorXd &dz,
                   double tau, double dtau, double kap, double dkap, int n_lp,
                   const std::vector<SocIndex> &socs)
{
    double alpha = 2.0;
    if (n_lp > 0)
    {
        double rhomin = ds(0) / lambda(0);
        double sigmamin = dz(0) / lambda(0);
        for (int i = 1; i < n_lp; ++i)
        {
            rhomin = std::min(rhomin, ds(i) / lambda(i));
            sigmamin = std::min(sigmamin, dz(i) / lambda(i));
        }
        if (-sigmamin > -rhomin)
            alpha = sigmamin < 0.0 ? -1.0 / sigmamin : 2.0;
        else
            alpha = rhomin < 0.0 ? -1.0 / rhomin : 2.0;
    }
    if (dtau < 0.0)
        alpha = std::min(alpha, -tau / dtau);
    if (dkap < 0.0)
        alpha = std::min(alpha, -kap / dkap);

    for (const SocIndex &c : socs)
    {
        const int q = c.dim;
        const auto lk = lambda.segment(c.start, q);
        const auto dsk = ds.segment(c.start, q);
        const auto dzk = dz.segment(c.start, q);

        const double lknorm =
            std::sqrt(lk(0) * lk(0) - lk.tail(q - 1).squaredNorm());
        const VectorXd lkbar = lk / lknorm;
        const double lknorminv = 1.0 / lknorm;

        const double lkbar_ds = lkbar(0) * dsk(0) - lkbar.tail(q - 1).dot(dsk.tail(q - 1));
        const double lkbar_dz = lkbar(0) * dzk(0) - lkbar.tail(q - 1).dot(dzk.tail(q - 1));

        double factor = (lkbar_ds + dsk(0)) / (lkbar(0) + 1.0);
        const double rho0 = lknorminv * lkbar_ds;
        const double rhonorm =
            (lknorminv * (dsk.tail(q - 1) - factor * lkbar.tail(q - 1))).norm() - rho0;

        factor = (lkbar_dz + dzk(0)) / (lkbar(0) + 1.0);
        const double sig0 = lknorminv * lkbar_dz;
        const double signorm =
            (lknorminv * (dzk.tail(q - 1) - factor * lkbar.tail(q - 1))).norm() - sig0;

        const double conic_step = std::max({0.0, rhonorm, signorm});
        if (conic_step != 0.0)
            alpha = std::min(alpha, 1.0 / conic_step);
    }
    return std::min(alpha, 1.0);
}

// --- condensed KKT system ---------------------------------------------------
//
//   [ dI     A'      G'      ] [dx]   [bx]
//   [ A     -dI      0       ] [dy] = [by]
//   [ G      0      -(W^2+dI)] [dz]   [bz]
//
// dz is eliminated through the cone block, leaving an (n+p) saddle system
// that is factored with partially pivoted LU. Refinement iterates on the
// residual of the full 3x3 system.
class KktSystem
{
  public:
    void setup(const Problem &prob, const std::vector<Entry> &A_entries,
               const std::vector<Entry> &G_entries, const std::vector<SocIndex> &socs,
               double delta, int refine_steps)
    {
        n_ = prob.n;
        p_ = prob.n_eq();
        m_ = prob.n_cone();
        n_lp_ = prob.n_lp;
        socs_ = &socs;
        A_ = &A_entries;
        G_ = &G_entries;
        delta_ = delta;
        refine_steps_ = refine_steps;

        A_dense_ = MatrixXd::Zero(p_, n_);
        for (const Entry &e : A_entries)
            A_dense_(e.row, e.col) += e.value;

        lp_rows_.assign(n_lp_, {});
        std::vector<std::vector<std::pair<int, double>>> soc_rows(m_);
        for (const Entry &e : G_entries)
        {
            if (e.row < n_lp_)
                lp_rows_[e.row].emplace_back(e.col, e.value);
            else
                soc_rows[e.row].emplace_back(e.col, e.value);
        }

        blocks_.clear();
        for (const SocIndex &c : socs)
        {
            SocBlock blk;
            blk.idx = c;
            std::vector<int> cols;
            for (int r = c.start; r < c.start + c.dim; ++r)
                for (const auto &[col, val] : soc_rows[r])
                    cols.push_back(col);
            std::sort(cols.begin(), cols.end());
            cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
            blk.cols = cols;
            blk.G_local = MatrixXd::Zero(c.dim, static_cast<int>(cols.size()));
            for (int r = c.start; r < c.start + c.dim; ++r)
                for (const auto &[col, val] : soc_rows[r])
                {
                    const int local =
                        static_cast<int>(std::lower_bound(cols.begin(), cols.end(), col) -
                                         cols.begin());
                    blk.G_local(r - c.start, local) += val;
                }
            blocks_.push_back(std::move(blk));
        }

        kkt_.resize(n_ + p_, n_ + p_);
        w_sq_.resize(blocks_.size());
        w_inv2_.resize(blocks_.size());
        wlp_sq_.resize(n_lp_);
    }

    bool factor(const Scalings &sc)
    {
        kkt_.setZero();
        auto M = kkt_.topLeftCorner(n_, n_);
        for (int i = 0; i < n_; ++i)
            M(i, i) = delta_;

        wlp_sq_ = sc.w_lp_sq;
        for (int r = 0; r < n_lp_; ++r)
        {
            const double coeff = 1.0 / (wlp_sq_(r) + delta_);
            for (const auto &[ci, vi] : lp_rows_[r])
                for (const auto &[cj, vj] : lp_rows_[r])
                    M(ci, cj) += vi * coeff * vj;
        }
        for (std::size_t k = 0; k < blocks_.size(); ++k)
        {
            const SocBlock &blk = blocks_[k];
            const int q = blk.idx.dim;
            // W^2 = eta^2 (2 wbar wbar' - J), J = diag(1, -I)
            const VectorXd &w = sc.wbar[k];
            MatrixXd W2 = 2.0 * w * w.transpose();
            W2(0, 0) -= 1.0;
            for (int j = 1; j < q; ++j)
                W2(j, j) += 1.0;
            W2 *= sc.eta_sq[k];
            w_sq_[k] = W2;
            w_inv2_[k] = (W2 + delta_ * MatrixXd::Identity(q, q)).inverse();

            const MatrixXd C = blk.G_local.transpose() * w_inv2_[k] * blk.G_local;
            for (std::size_t a = 0; a < blk.cols.size(); ++a)
                for (std::size_t b = 0; b < blk.cols.size(); ++b)
                    M(blk.cols[a], blk.cols[b]) += C(a, b);
        }

        kkt_.topRightCorner(n_, p_) = A_dense_.transpose();
        kkt_.bottomLeftCorner(p_, n_) = A_dense_;
        for (int i = 0; i < p_; ++i)
            kkt_(n_ + i, n_ + i) = -delta_;

        if (!kkt_.allFinite())
            return false;
        lu_.compute(kkt_);
        return true;
    }

    // Solve the full 3x3 system for (dx, dy, dz), with iterative refinement.
    void solve(const VectorXd &bx, const VectorXd &by, const VectorXd &bz,
               VectorXd &dx, VectorXd &dy, VectorXd &dz) const
    {
        solve_once(bx, by, bz, dx, dy, dz);

        VectorXd ex(n_), ey(p_), ez(m_), cx(n_), cy(p_), cz(m_);
        double err = residual(bx, by, bz, dx, dy, dz, ex, ey, ez);
        const double stop =
            kLinsysAccuracy *
            (1.0 + std::max({bx.lpNorm<Eigen::Infinity>(),
                             p_ > 0 ? by.lpNorm<Eigen::Infinity>() : 0.0,
                             bz.lpNorm<Eigen::Infinity>()}));
        for (int it = 0; it < refine_steps_ && err > stop; ++it)
        {
            solve_once(ex, ey, ez, cx, cy, cz);
            VectorXd nx = dx + cx, ny = dy + cy, nz = dz + cz;
            const double new_err = residual(bx, by, bz, nx, ny, nz, ex, ey, ez);
            if (new_err >= err)
                break;
            dx.swap(nx);
            dy.swap(ny);
            dz.swap(nz);
            err = new_err;
        }
    }

  private:
    struct SocBlock
    {
        SocIndex idx;
        std::vector<int> cols;
        MatrixXd G_local;
    };

    // One pass through the condensed system (no refinement).
    void solve_once(const VectorXd &bx, const VectorXd &by, const VectorXd &bz,
                    VectorXd &dx, VectorXd &dy, VectorXd &dz) const
    {
        VectorXd t(m_);
        apply_cone_inverse(bz, t);

        VectorXd rhs(n_ + p_);
        rhs.head(n_) = bx;
        add_tproduct(*G_, t, 1.0, rhs.head(n_));
        rhs.tail(p_) = by;

        const VectorXd sol = lu_.solve(rhs);
        dx = sol.head(n_);
        dy = sol.tail(p_);

        VectorXd gx = VectorXd::Zero(m_);
        add_product(*G_, dx, 1.0, gx);
        gx -= bz;
        dz.resize(m_);
        apply_cone_inverse(gx, dz);
    }

    // out = (W^2 + delta I)^{-1} v
    void apply_cone_inverse(const VectorXd &v, VectorXd &out) const
    {
        for (int i = 0; i < n_lp_; ++i)
            out(i) = v(i) / (wlp_sq_(i) + delta_);
        for (std::size_t k = 0; k < blocks_.size(); ++k)
        {
            const SocIndex &c = blocks_[k].idx;
            out.segment(c.start, c.dim).noalias() =
                w_inv2_[k] * v.segment(c.start, c.dim);
        }
    }

    // Residual of the UNregularized 3x3 system; returns its max norm. The
    // factorization carries the static regularization, refinement drives the
    // solution towards the true saddle system.
    double residual(const VectorXd &bx, const VectorXd &by, const VectorXd &bz,
                    const VectorXd &dx, const VectorXd &dy, const VectorXd &dz,
                    VectorXd &ex, VectorXd &ey, VectorXd &ez) const
    {
        ex = bx;
        add_tproduct(*A_, dy, -1.0, ex);
        add_tproduct(*G_, dz, -1.0, ex);

        ey = by;
        add_product(*A_, dx, -1.0, ey);

        ez = bz;
        add_product(*G_, dx, -1.0, ez);
        for (int i = 0; i < n_lp_; ++i)
            ez(i) += wlp_sq_(i) * dz(i);
        for (std::size_t k = 0; k < blocks_.size(); ++k)
        {
            const SocIndex &c = blocks_[k].idx;
            ez.segment(c.start, c.dim).noalias() += w_sq_[k] * dz.segment(c.start, c.dim);
        }
        return std::max({ex.lpNorm<Eigen::Infinity>(),
                         p_ > 0 ? ey.lpNorm<Eigen::Infinity>() : 0.0,
                         ez.lpNorm<Eigen::Infinity>()});
    }

    int n_ = 0, p_ = 0, m_ = 0, n_lp_ = 0;
    const std::vector<SocIndex> *socs_ = nullptr;
    const std::vector<Entry> *A_ = nullptr;
    const std::vector<Entry> *G_ = nullptr;
    double delta_ = 0.0;
    int refine_steps_ = 0;

    MatrixXd A_dense_;
    std::vector<std::vector<std::pair<int, double>>> lp_rows_;
    std::vector<SocBlock> blocks_;

    MatrixXd kkt_;
    Eigen::PartialPivLU<MatrixXd> lu_;
    std::vector<MatrixXd> w_sq_, w_inv2_;
    VectorXd wlp_sq_;
};

// --- convergence bookkeeping ------------------------------------------------

struct Stats
{
    double pcost = kNan, dcost = kNan;
    double gap = kNan, relgap = kNan;
    double pres = kNan, dres = kNan;
    double pinfres = kNan, dinfres = kNan;
    double mu = kNan;
    double cx = kNan, by = kNan, hz = kNan;

    double score() const
    {
        const double rg = std::isfinite(relgap) ? relgap : gap / std::max(1.0, std::abs(pcost));
        return std::max({pres, dres, rg});
    }
};

enum class Verdict
{
    none,
    optimal,
    primal_infeasible,
    dual_infeasible
};

Verdict check_exit(const Stats &st, double tau, double kap, double feastol, double abstol,
                   double reltol)
{
    if ((-st.cx > 0.0 || -st.by - st.hz >= -abstol) && st.pres < feastol &&
        st.dres < feastol && (st.gap < abstol || (std::isfinite(st.relgap) && st.relgap < reltol)))
        return Verdict::optimal;
    if (std::isfinite(st.pinfres) && st.pinfres < feastol &&
        (tau < kap || (tau < feastol && kap < feastol)))
        return Verdict::primal_infeasible;
    if (std::isfinite(st.dinfres) && st.dinfres < feastol && tau < kap)
        return Verdict::dual_infeasible;
    return Verdict::none;
}

} // namespace

const char *to_string(SolveStatus status)
{
    switch (status)
    {
    case SolveStatus::optimal:
        return "optimal";
    case SolveStatus::primal_infeasible:
        return "primal infeasible";
    case SolveStatus::dual_infeasible:
        return "dual infeasible";
    case SolveStatus::max_iterations:
        return "maximum iterations";
    case SolveStatus::numerical_problem:
        return "numerical problem";
    }
    return "unknown";
}

Solution solve(const Problem &problem, const Settings &settings)
{
    const int n = problem.n;
    const int p = problem.n_eq();
    const int m = problem.n_cone();

    if (n <= 0)
        throw std::invalid_argument("cone program has no variables");
    if (problem.c.size() != n)
        throw std::invalid_argument("objective size does not match variable count");
    int cone_rows = problem.n_lp;
    for (int q : problem.soc_dims)
    {
        if (q < 2)
            throw std::invalid_argument("second-order cone must have dimension >= 2");
        cone_rows += q;
    }
    if (cone_rows != m)
        throw std::invalid_argument("cone dimensions do not match the rows of G/h");
    if (m <= 0)
        throw std::invalid_argument("cone program needs at least one conic constraint");
    for (const Entry &e : problem.A_entries)
        if (e.row < 0 || e.row >= p || e.col < 0 || e.col >= n)
            throw std::invalid_argument("equality entry out of range");
    for (const Entry &e : problem.G_entries)
        if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n)
            throw std::invalid_argument("cone entry out of range");

    std::vector<SocIndex> socs;
    {
        int start = problem.n_lp;
        for (int q : problem.soc_dims)
        {
            socs.push_back({start, q});
            start += q;
        }
    }
    const int degree = problem.n_lp + static_cast<int>(socs.size());

    // --- Ruiz equilibration -------------------------------------------------
    std::vector<Entry> A_eq = problem.A_entries;
    std::vector<Entry> G_eq = problem.G_entries;
    VectorXd col_scale = VectorXd::Ones(n);
    VectorXd arow_scale = VectorXd::Ones(p);
    VectorXd grow_scale = VectorXd::Ones(m);
    for (int pass = 0; pass < settings.equil_iters; ++pass)
    {
        VectorXd cmax = VectorXd::Zero(n), armax = VectorXd::Zero(p), grmax = VectorXd::Zero(m);
        for (const Entry &e : A_eq)
        {
            const double v = std::abs(e.value);
            cmax(e.col) = std::max(cmax(e.col), v);
            armax(e.row) = std::max(armax(e.row), v);
        }
        for (const Entry &e : G_eq)
        {
            const double v = std::abs(e.value);
            cmax(e.col) = std::max(cmax(e.col), v);
            grmax(e.row) = std::max(grmax(e.row), v);
        }
        // rows of one second-order cone must share a single scaling
        for (const SocIndex &c : socs)
        {
            const double blk = grmax.segment(c.start, c.dim).maxCoeff();
            grmax.segment(c.start, c.dim).setConstant(blk);
        }
        auto step = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
        for (int j = 0; j < n; ++j)
            cmax(j) = step(cmax(j));
        for (int i = 0; i < p; ++i)
            armax(i) = step(armax(i));
        for (int i = 0; i < m; ++i)
            grmax(i) = step(grmax(i));
        for (Entry &e : A_eq)
            e.value *= armax(e.row) * cmax(e.col);
        for (Entry &e : G_eq)
            e.value *= grmax(e.row) * cmax(e.col);
        col_scale = col_scale.cwiseProduct(cmax);
        arow_scale = arow_scale.cwiseProduct(armax);
        grow_scale = grow_scale.cwiseProduct(grmax);
    }
    const VectorXd c = problem.c.cwiseProduct(col_scale);
    const VectorXd b = problem.b.cwiseProduct(arow_scale);
    const VectorXd h = problem.h.cwiseProduct(grow_scale);

    const double resx0 = std::max(1.0, c.norm());
    const double resy0 = std::max(1.0, b.norm());
    const double resz0 = std::max(1.0, h.norm());

    KktSystem kkt;
    kkt.setup(problem, A_eq, G_eq, socs, settings.delta_static, settings.refine_steps);

    Solution out;
    out.x = VectorXd::Zero(n);
    out.y = VectorXd::Zero(p);
    out.z = VectorXd::Zero(m);
    out.s = VectorXd::Zero(m);

    auto finalize = [&](SolveStatus status, bool reduced, const VectorXd &x, const VectorXd &y,
                        const VectorXd &z, const VectorXd &s, double tau, int iters) {
        out.status = status;
        out.reduced_accuracy = reduced;
        out.iterations = iters;
        const double div = (status == SolveStatus::optimal) ? tau : 1.0;
        out.x = x.cwiseProduct(col_scale) / div;
        out.y = y.cwiseProduct(arow_scale) / div;
        out.z = z.cwiseProduct(grow_scale) / div;
        out.s = (s.cwiseQuotient(grow_scale)) / div;
        out.primal_obj = problem.c.dot(out.x);
        out.dual_obj = -(problem.b.dot(out.y) + problem.h.dot(out.z));
        out.gap = out.s.dot(out.z);
        return out;
    };

    // --- initial point ------------------------------------------------------
    Scalings sc;
    sc.set_identity(problem.n_lp, socs, m);
    if (!kkt.factor(sc))
        return finalize(SolveStatus::numerical_problem, false, out.x, out.y, out.z, out.s, 1.0, 0);

    VectorXd x(n), y(p), z(m), s(m);
    {
        VectorXd dx(n), dy(p), dz(m);
        kkt.solve(VectorXd::Zero(n), b, h, dx, dy, dz);
        x = dx;
        s = -dz;
        bring_to_cone(problem.n_lp, socs, settings.step_damping, s);

        kkt.solve(-c, VectorXd::Zero(p), VectorXd::Zero(m), dx, dy, dz);
        y = dy;
        z = dz;
        bring_to_cone(problem.n_lp, socs, settings.step_damping, z);
    }
    double tau = 1.0, kap = 1.0;

    VectorXd rx(n), ry(p), rz(m);
    double rt = 0.0;
    Stats st, prev_st, best_st;
    best_st.pres = best_st.dres = best_st.gap = std::numeric_limits<double>::infinity();
    best_st.pcost = 0.0; // keeps score() finite-comparable before the first update
    VectorXd best_x = x, best_y = y, best_z = z, best_s = s;
    double best_tau = tau, best_kap = kap;

    VectorXd dx1(n), dy1(p), dz1(m);
    VectorXd dx2(n), dy2(p), dz2(m);
    VectorXd rhs_z(m);
    VectorXd W_dz(m), ds_by_W(m), ds_comb(m), lambda_div(m), ds(m);

    // fallback exit through the best iterate seen, at relaxed tolerances
    auto degrade = [&](SolveStatus hard_status, int iters) {
        const Verdict v = check_exit(best_st, best_tau, best_kap, settings.feastol_inacc,
                                     settings.abstol_inacc, settings.reltol_inacc);
        if (v == Verdict::optimal)
            return finalize(SolveStatus::optimal, true, best_x, best_y, best_z, best_s, best_tau,
                            iters);
        if (v == Verdict::primal_infeasible)
            return finalize(SolveStatus::primal_infeasible, true, best_x, best_y, best_z, best_s,
                            best_tau, iters);
        if (v == Verdict::dual_infeasible)
            return finalize(SolveStatus::dual_infeasible, true, best_x, best_y, best_z, best_s,
                            best_tau, iters);
        return finalize(hard_status, false, best_x, best_y, best_z, best_s, best_tau, iters);
    };

    int iter = 0;
    for (;; ++iter)
    {
        // residuals of the homogeneous embedding
        rx = -c * tau;
        add_tproduct(A_eq, y, -1.0, rx);
        add_tproduct(G_eq, z, -1.0, rx);
        const double hresx = (rx + c * tau).norm();

        ry = -b * tau;
        add_product(A_eq, x, 1.0, ry);
        const double hresy = (ry + b * tau).norm();

        rz = s - h * tau;
        add_product(G_eq, x, 1.0, rz);
        const double hresz = (rz + h * tau).norm();

        st.cx = c.dot(x);
        st.by = p > 0 ? b.dot(y) : 0.0;
        st.hz = h.dot(z);
        rt = kap + st.cx + st.by + st.hz;

        const double nx = x.norm(), ny = y.norm(), nz = z.norm(), ns = s.norm();
        st.gap = s.dot(z);
        st.mu = (st.gap + kap * tau) / (degree + 1);
        st.pcost = st.cx / tau;
        st.dcost = -(st.hz + st.by) / tau;
        if (st.pcost < 0.0)
            st.relgap = st.gap / (-st.pcost);
        else if (st.dcost > 0.0)
            st.relgap = st.gap / st.dcost;
        else
            st.relgap = kNan;
        st.pres = std::max(ry.norm() / std::max(resy0 + nx, 1.0),
                           rz.norm() / std::max(resz0 + nx + ns, 1.0)) /
                  tau;
        st.dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau;
        st.pinfres = (st.hz + st.by) / std::max(ny + nz, 1.0) < -settings.reltol
                         ? hresx / std::max(ny + nz, 1.0)
                         : kNan;
        st.dinfres = st.cx / std::max(nx, 1.0) < -settings.reltol
                         ? std::max(hresy / std::max(nx, 1.0),
                                    hresz / std::max(nx + ns, 1.0))
                         : kNan;

        if (settings.verbose)
            std::printf("%3d  pcost=%+.6e dcost=%+.6e gap=%.2e pres=%.2e dres=%.2e "
                        "mu=%.2e tau=%.2e kap=%.2e\n",
                        iter, st.pcost, st.dcost, st.gap, st.pres, st.dres, st.mu, tau, kap);

        if (!std::isfinite(st.pres) || !std::isfinite(st.dres))
            return degrade(SolveStatus::numerical_problem, iter);

        const Verdict verdict =
            check_exit(st, tau, kap, settings.feastol, settings.abstol, settings.reltol);
        if (verdict == Verdict::optimal)
            return finalize(SolveStatus::optimal, false, x, y, z, s, tau, iter);
        if (verdict == Verdict::primal_infeasible)
            return finalize(SolveStatus::primal_infeasible, false, x, y, z, s, tau, iter);
        if (verdict == Verdict::dual_infeasible)
            return finalize(SolveStatus::dual_infeasible, false, x, y, z, s, tau, iter);

        if (iter > 0 && st.pres > kSafeguard * prev_st.pres)
            return degrade(SolveStatus::numerical_problem, iter);
        if (iter >= settings.max_iterations)
            return degrade(SolveStatus::max_iterations, iter);

        if (st.score() < best_st.score())
        {
            best_st = st;
            best_x = x;
            best_y = y;
            best_z = z;
            best_s = s;
            best_tau = tau;
            best_kap = kap;
        }
        prev_st = st;

        // scaling update and factorization
        if (!update_scalings(s, z, problem.n_lp, socs, sc))
            return degrade(SolveStatus::numerical_problem, iter);
        if (!kkt.factor(sc))
            return degrade(SolveStatus::numerical_problem, iter);

        kkt.solve(-c, b, h, dx1, dy1, dz1);
        const double dtau_denom = kap / tau - c.dot(dx1) - (p > 0 ? b.dot(dy1) : 0.0) -
                                  h.dot(dz1);
        if (!std::isfinite(dtau_denom) || dtau_denom == 0.0)
            return degrade(SolveStatus::numerical_problem, iter);

        // affine (predictor) direction
        rhs_z = s - rz;
        kkt.solve(rx, -ry, rhs_z, dx2, dy2, dz2);
        const double dtau_aff = (rt - kap + c.dot(dx2) + (p > 0 ? b.dot(dy2) : 0.0) +
                                 h.dot(dz2)) /
                                dtau_denom;
        dz2 += dtau_aff * dz1;
        scale(sc, problem.n_lp, socs, dz2, W_dz);
        ds_by_W = -W_dz - sc.lambda;
        const double dkap_aff = -kap - (kap / tau) * dtau_aff;

        const double alpha_aff = line_search(sc.lambda, ds_by_W, W_dz, tau, dtau_aff, kap,
                                             dkap_aff, problem.n_lp, socs);
        const double sigma =
            std::clamp((1.0 - alpha_aff) * (1.0 - alpha_aff) * (1.0 - alpha_aff), 1e-4, 0.9999);

        // combined (corrector) direction
        conic_product(problem.n_lp, socs, sc.lambda, sc.lambda, ds_comb);
        {
            VectorXd cross(m);
            conic_product(problem.n_lp, socs, ds_by_W, W_dz, cross);
            ds_comb += cross;
        }
        ds_comb.head(problem.n_lp).array() -= sigma * st.mu;
        for (const SocIndex &cidx : socs)
            ds_comb(cidx.start) -= sigma * st.mu;

        conic_division(problem.n_lp, socs, sc.lambda, ds_comb, lambda_div);
        scale(sc, problem.n_lp, socs, lambda_div, rhs_z);
        rhs_z -= (1.0 - sigma) * rz;
        kkt.solve((1.0 - sigma) * rx, -(1.0 - sigma) * ry, rhs_z, dx2, dy2, dz2);

        const double bkap = kap * tau + dkap_aff * dtau_aff - sigma * st.mu;
        const double dtau = ((1.0 - sigma) * rt - bkap / tau + c.dot(dx2) +
                             (p > 0 ? b.dot(dy2) : 0.0) + h.dot(dz2)) /
                            dtau_denom;
        dx2 += dtau * dx1;
        dy2 += dtau * dy1;
        dz2 += dtau * dz1;
        scale(sc, problem.n_lp, socs, dz2, W_dz);
        ds_by_W = -(lambda_div + W_dz);
        const double dkap = -(bkap + kap * dtau) / tau;

        double alpha = line_search(sc.lambda, ds_by_W, W_dz, tau, dtau, kap, dkap,
                                   problem.n_lp, socs) *
                       settings.step_damping;

        scale(sc, problem.n_lp, socs, ds_by_W, ds);
        x += alpha * dx2;
        y += alpha * dy2;
        z += alpha * dz2;
        s += alpha * ds;
        tau += alpha * dtau;
        kap += alpha * dkap;
        if (tau <= 0.0 || kap <= 0.0 || !std::isfinite(tau) || !std::isfinite(kap))
            return degrade(SolveStatus::numerical_problem, iter);
    }
}

ResidualReport check_residuals(const Problem &problem, const Eigen::VectorXd &x)
{
    ResidualReport rep;
    VectorXd ax = VectorXd::Zero(problem.n_eq());
    add_product(problem.A_entries, x, 1.0, ax);
    if (problem.n_eq() > 0)
        rep.eq_violation = (ax - problem.b).lpNorm<Eigen::Infinity>();

    VectorXd s = problem.h;
    add_product(problem.G_entries, x, -1.0, s);
    for (int i = 0; i < problem.n_lp; ++i)
        rep.cone_violation = std::max(rep.cone_violation, -s(i));
    int start = problem.n_lp;
    for (int q : problem.soc_dims)
    {
        const double dev = s.segment(start + 1, q - 1).norm() - s(start);
        rep.cone_violation = std::max(rep.cone_violation, dev);
        start += q;
    }
    return rep;
}

} // namespace aerosurvey::conic
