#!/usr/bin/env python3
"""Regenerate tests/conic_fixtures.hpp.

Builds a batch of random cone programs in the standard form

    minimize    c'x
    subject to  A x = b
                h - G x  in  K   (LP cone rows first, then second-order cones)

solves them with an independent convex solver (CVXPY), and freezes the
verdicts and optimal objectives into a C++ header. Feasible instances are
constructed around a known interior point and boxed so the optimum exists;
infeasible ones add a contradictory pair of linear rows.
"""

import numpy as np
import cvxpy as cp

SEED = 20260823
N_FEASIBLE = 8
N_INFEASIBLE = 3
OUT = "tests/conic_fixtures.hpp"


def build_instance(rng, infeasible):
    n = int(rng.integers(4, 10))
    p = int(rng.integers(0, n // 2 + 1))
    n_soc = int(rng.integers(1, 4))
    soc_dims = [int(rng.integers(2, 5)) for _ in range(n_soc)]

    x0 = rng.normal(size=n)
    c = rng.normal(size=n)

    A = rng.normal(size=(p, n)) if p else np.zeros((0, n))
    b = A @ x0 if p else np.zeros(0)

    # box |x_i| <= 10 keeps every instance bounded; x0 is well inside
    rows = []
    h = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e)
        h.append(10.0)
        rows.append(-e)
        h.append(10.0)
    n_lp = len(rows)

    for q in soc_dims:
        Gq = rng.normal(size=(q, n))
        v = Gq[1:] @ x0
        # h - G x0 = (||v|| + margin, -v + 0) -> strictly inside the cone
        h.append(float(Gq[0] @ x0 + np.linalg.norm(v) + 1.0 + rng.uniform(0.0, 2.0)))
        rows.append(Gq[0])
        for j in range(1, q):
            rows.append(Gq[j])
            h.append(float(0.0))
        # h_j - G_j x0 = -(Gq[j] x0) + h_j ... fix tail targets below
    G = np.vstack(rows)
    h = np.array(h)

    # retarget the SOC tails so that h - G x0 has tail exactly v (norm < head)
    row = n_lp
    for q in soc_dims:
        for j in range(1, q):
            h[row + j] = float(G[row + j] @ x0 + rng.normal() * 0.3)
        row += q

    if infeasible:
        e = np.zeros(n)
        e[0] = 1.0
        G = np.vstack([np.vstack([e, -e]), G])
        h = np.concatenate([[1.0, -2.0], h])  # x0 <= 1 and x0 >= 2
        n_lp += 2

    return n, n_lp, soc_dims, A, b, G, h, c


def solve_reference(n, n_lp, soc_dims, A, b, G, h, c):
    x = cp.Variable(n)
    cons = []
    if A.shape[0]:
        cons.append(A @ x == b)
    s = h - G @ x
    if n_lp:
        cons.append(s[:n_lp] >= 0)
    row = n_lp
    for q in soc_dims:
        cons.append(cp.SOC(s[row], s[row + 1:row + q]))
        row += q
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.SolverError:
        prob.solve(solver=cp.ECOS, abstol=1e-9, reltol=1e-9, feastol=1e-9)
    return prob.status, prob.value


def emit(fixtures):
    def dense_entries(M):
        r, c, v = [], [], []
        for (i, j), val in np.ndenumerate(M):
            if val != 0.0:
                r.append(i)
                c.append(j)
                v.append(val)
        return r, c, v

    def int_list(xs):
        return "{" + ", ".join(str(int(v)) for v in xs) + "}"

    def dbl_list(xs):
        return "{" + ", ".join(f"{v:.17g}" for v in xs) + "}"

    lines = []
    lines.append("// Generated by tools/make_conic_fixtures.py -- do not edit by hand.")
    lines.append("// Verdicts and objectives come from an independent convex solver.")
    lines.append("#pragma once")
    lines.append("")
    lines.append("#include <vector>")
    lines.append("")
    lines.append("namespace conic_fixtures")
    lines.append("{")
    lines.append("")
    lines.append("struct Fixture")
    lines.append("{")
    lines.append("    int n, n_lp;")
    lines.append("    std::vector<int> soc_dims;")
    lines.append("    std::vector<int> a_row, a_col;")
    lines.append("    std::vector<double> a_val, b;")
    lines.append("    std::vector<int> g_row, g_col;")
    lines.append("    std::vector<double> g_val, h, c;")
    lines.append("    bool feasible;")
    lines.append("    double objective;")
    lines.append("};")
    lines.append("")
    lines.append("inline const std::vector<Fixture> &all()")
    lines.append("{")
    lines.append("    static const std::vector<Fixture> fixtures = {")
    for n, n_lp, soc_dims, A, b, G, h, c, feasible, obj in fixtures:
        ar, ac, av = dense_entries(A)
        gr, gc, gv = dense_entries(G)
        lines.append("        {")
        lines.append(f"            {n}, {n_lp}, {int_list(soc_dims)},")
        lines.append(f"            {int_list(ar)}, {int_list(ac)},")
        lines.append(f"            {dbl_list(av)}, {dbl_list(b)},")
        lines.append(f"            {int_list(gr)}, {int_list(gc)},")
        lines.append(f"            {dbl_list(gv)}, {dbl_list(h)}, {dbl_list(c)},")
        lines.append(f"            {'true' if feasible else 'false'}, {obj:.17g},")
        lines.append("        },")
    lines.append("    };")
    lines.append("    return fixtures;")
    lines.append("}")
    lines.append("")
    lines.append("} // namespace conic_fixtures")
    lines.append("")
    with open(OUT, "w") as f:
        f.write("\n".join(lines))


def main():
    rng = np.random.default_rng(SEED)
    fixtures = []
    made_feasible = 0
    made_infeasible = 0
    while made_feasible < N_FEASIBLE or made_infeasible < N_INFEASIBLE:
        want_infeasible = made_feasible >= N_FEASIBLE or (
            made_infeasible < N_INFEASIBLE and rng.uniform() < 0.3
        )
        inst = build_instance(rng, want_infeasible)
        status, value = solve_reference(*inst)
        if status in ("optimal",) and not want_infeasible:
            fixtures.append((*inst, True, float(value)))
            made_feasible += 1
        elif status in ("infeasible", "infeasible_inaccurate") and want_infeasible:
            fixtures.append((*inst, False, 0.0))
            made_infeasible += 1
        else:
            print(f"discarding instance with status {status}")
    emit(fixtures)
    print(f"wrote {OUT} with {len(fixtures)} fixtures")


if __name__ == "__main__":
    main()
