"""Coefficient optimization for the averaging array.

Three strategies mirror the nesting of the underlying problems: fixed
horizon (all rows jointly, small n only), sequential (row n with earlier
rows frozen), and monotone sequential (sequential plus the monotone-row
constraints, which turn the stage objective into an explicit quadratic).
A per-scheme variant optimizes only the 1-2 stepsize parameters of a named
iteration family at each stage.

Float mode uses multistart local search (Nelder-Mead with simplex
projection; SLSQP on the smooth monotone-stage quadratic).  Exact-rational
mode solves the small stages globally by enumerating KKT systems of the
quadratic over every face of the feasible polytope.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .distances import (DistanceTable, build_distance_table, empty_table,
                        pair_distance, residual_from_table)
from .schemes import SchemeSpec, TriangularArray, build_rows
from .transport import (CostMatrix, Distribution, MonotonePreconditionError,
                        greedy_monotone_transport, solve_transport)


class OptimizeInputError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_evals: int = 20000
    tolerance: float = 1e-10
    seed: int = 0
    mode: str = "MS"  # FH | S | MS | SchemeConstrained

    def __post_init__(self):
        if self.restarts < 1:
            raise OptimizeInputError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise OptimizeInputError("tolerance must be positive")


@dataclass
class OptimizationResult:
    array: TriangularArray
    values: list                 # R_0..R_N recomputed from the array
    stage_values: list           # best objective found at each stage (1..N)
    coefficients: dict           # per-stage stepsizes for scheme searches
    certificates: list           # |stage objective - recomputed R_n| per stage
    wall_time: float
    table: Optional[DistanceTable] = None


# ---------------------------------------------------------------------------
# shared helpers

def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1
    ks = np.arange(1, len(v) + 1)
    cond = u - css / ks > 0
    rho = ks[cond][-1]
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def _dcol(table: DistanceTable, n: int) -> List[float]:
    """d(i-1, n-1) for i = 0..n (the cost column used by stage n)."""
    return [table.d(i - 1, n - 1) for i in range(n + 1)]


def _two_point_beta(row):
    """beta if the row is (1 - beta, 0, ..., 0, beta), else None."""
    last = len(row) - 1
    if last == 0:
        return 0 * row[0]  # exact zero in the row's arithmetic (float/Fraction)
    if any(row[i] != 0 for i in range(1, last)):
        return None
    if abs(row[0] + row[last] - 1) > 1e-13:
        return None
    return row[last]


def stage_residual(rows, table: DistanceTable, cand, n: int,
                   rows_monotone: bool = True, exact: bool = False):
    """R_n for candidate row `cand` with rows/table up to n-1 frozen.

    Per pair, uses the closed-form nested-plan cost when the monotone
    preconditions hold, the two-point distance recursion when both rows are
    anchored two-point rows, and the transport solver otherwise.
    """
    tol = 0 if exact else 1e-12
    dcol = _dcol(table, n)
    total = cand[0] * 1  # d(-1, n) = 1
    tail_after = [0] * (n + 1)
    acc = 0
    for j in range(n - 1, -1, -1):
        acc += cand[j]
        tail_after[j] = acc  # sum_{i=j}^{n-1} cand_i
    cand_beta = _two_point_beta(cand)
    for k in range(1, n + 1):
        m = k - 1
        prow = rows[m]
        if cand_beta is not None:
            pb = _two_point_beta(prow)
            if pb is not None:
                dmn = abs(pb - cand_beta) + min(pb, cand_beta) * table.d(m - 1, n - 1)
                total += cand[k] * dmn
                continue
        fast = rows_monotone
        if fast:
            for i in range(m + 1):
                if cand[i] > prow[i] + tol:
                    fast = False
                    break
            if fast and prow[m] < tail_after[m] - tol:
                fast = False
        if fast:
            dmn = sum((prow[i] - cand[i]) * dcol[i] for i in range(m + 1))
            base = table.d(m - 1, n - 1)
            dmn += sum(cand[j] * (table.d(m - 1, j - 1) - base)
                       for j in range(m + 1, n + 1))
        else:
            plan = pair_distance(table, list(rows) + [tuple(cand)], m, n,
                                 exact=exact, allow_greedy=False)
            dmn = plan.objective
        total += cand[k] * dmn
    return total


class StageEvaluator:
    """Stage-n residual evaluation with a cutting-plane surrogate.

    The per-pair distance d(m, n) is a convex piecewise-linear function of
    the candidate margins: the max of u.cand - v.pi^m over dual-feasible
    potentials, whose feasible set does not depend on the candidate.  Dual
    solutions harvested from exact solves therefore give reusable lower
    bounds, making derivative-free search cheap; `exact` confirms (and
    tightens the pools at) incumbents.
    """

    def __init__(self, rows, table: DistanceTable, n: int, rows_monotone: bool):
        self.rows = [tuple(r) for r in rows]
        self.table = table
        self.n = n
        self.rows_monotone = rows_monotone
        self.dcol = _dcol(table, n)
        self.base = [table.d(k - 2, n - 1) for k in range(1, n + 1)]
        self.betas = [_two_point_beta(r) for r in self.rows]
        # per pair m = k-1: matrix of dual rows U and constants -v.a
        self.pool_U: List[list] = [[] for _ in range(n)]
        self.pool_c: List[list] = [[] for _ in range(n)]
        self._dmrows: Dict[int, list] = {}
        self._lp_cache: Dict[int, tuple] = {}
        self.exact_solves = 0

    def _dmrow(self, m):
        row = self._dmrows.get(m)
        if row is None:
            row = [self.table.d(m - 1, j - 1) for j in range(self.n + 1)]
            self._dmrows[m] = row
        return row

    def _pair_fast(self, cand, cb, k, tail_mk):
        """Closed-form d(k-1, n) for the candidate, or None."""
        m = k - 1
        prow = self.rows[m]
        if cb is not None and self.betas[m] is not None:
            pb = self.betas[m]
            return abs(pb - cb) + min(pb, cb) * self.dcol[m]
        if not self.rows_monotone:
            return None
        for i in range(m + 1):
            if cand[i] > prow[i] + 1e-12:
                return None
        if prow[m] < tail_mk - 1e-12:
            return None
        val = sum((prow[i] - cand[i]) * self.dcol[i] for i in range(m + 1))
        base = self.base[m]
        drow = self._dmrow(m)
        val += sum(cand[j] * (drow[j] - base)
                   for j in range(m + 1, self.n + 1))
        return val

    def _tails(self, cand):
        out = [0.0] * (self.n + 1)
        acc = 0.0
        for j in range(self.n - 1, -1, -1):
            acc += cand[j]
            out[j] = acc
        return out

    def surrogate(self, cand) -> float:
        """Lower bound on R_n(cand); exact where closed forms apply."""
        tails = self._tails(cand)
        cb = _two_point_beta(cand)
        c = None
        total = cand[0]
        for k in range(1, self.n + 1):
            d = self._pair_fast(cand, cb, k, tails[k - 1])
            if d is None:
                m = k - 1
                if not self.pool_U[m]:
                    d = self._solve_pair(cand, k)
                else:
                    if c is None:
                        c = np.asarray(cand, dtype=float)
                    U = np.asarray(self.pool_U[m])
                    d = float((U @ c + np.asarray(self.pool_c[m])).max())
            total += cand[k] * d
        return float(total)

    def exact(self, cand) -> float:
        """True R_n(cand); harvests duals from any transport solves."""
        return float(cand[0] + sum(cand[k] * d
                                   for k, d in self.pair_exacts(cand)))

    def pair_exacts(self, cand):
        """(k, exact d(k-1, n)) for k = 1..n at the candidate row."""
        tails = self._tails(cand)
        cb = _two_point_beta(cand)
        for k in range(1, self.n + 1):
            d = self._pair_fast(cand, cb, k, tails[k - 1])
            if d is None:
                d = self._solve_pair(cand, k)
            yield k, d

    def freeze(self, rows, cand):
        """Accept the candidate: append it and fill d(k, n) and R_n."""
        dvals = dict(self.pair_exacts(cand))
        rows.append(tuple(cand))
        for k, d in dvals.items():
            self.table.set_d(k - 1, self.n, d)
        self.table.residuals.append(
            residual_from_table(self.table, rows[self.n], self.n))

    def _pair_lp(self, m):
        """Cached (cost vector, sparse margin constraints) for pair (m, n)."""
        cached = self._lp_cache.get(m)
        if cached is None:
            from scipy.sparse import coo_matrix

            M, Nt = m + 1, self.n + 1
            cvec = np.array([self.table.d(i - 1, j - 1)
                             for i in range(M) for j in range(Nt)])
            rows_idx, cols_idx = [], []
            for i in range(M):
                for j in range(Nt):
                    rows_idx.append(i)
                    cols_idx.append(i * Nt + j)
            for j in range(Nt):
                for i in range(M):
                    rows_idx.append(M + j)
                    cols_idx.append(i * Nt + j)
            A = coo_matrix((np.ones(len(rows_idx)), (rows_idx, cols_idx)),
                           shape=(M + Nt, M * Nt)).tocsr()
            cached = (cvec, A)
            self._lp_cache[m] = cached
        return cached

    def _solve_pair(self, cand, k) -> float:
        """Exact d(k-1, n) at the candidate via an LP; duals go to the pool."""
        from scipy.optimize import linprog

        m = k - 1
        cvec, A = self._pair_lp(m)
        b_eq = np.concatenate([np.asarray(self.rows[m], dtype=float),
                               np.asarray(cand, dtype=float)])
        # presolve mis-declares infeasibility when margins span many orders
        # of magnitude (tiny but genuine masses), so it stays off
        res = linprog(cvec, A_eq=A, b_eq=b_eq, bounds=(0, None), method="highs",
                      options={"presolve": False})
        if not res.success:
            plan = pair_distance(self.table, self.rows + [tuple(cand)], m,
                                 self.n, allow_greedy=False)
            self.exact_solves += 1
            u = np.asarray(plan.dual_u, dtype=float)
            const = -sum(v * a for v, a in zip(plan.dual_v, self.rows[m]))
            self.pool_U[m].append(u)
            self.pool_c[m].append(const)
            return float(plan.objective)
        self.exact_solves += 1
        y = np.asarray(res.eqlin.marginals)
        u = y[m + 1:]                       # target-margin duals
        const = float(y[: m + 1] @ b_eq[: m + 1])
        self.pool_U[m].append(u)
        self.pool_c[m].append(const)
        return float(res.fun)


def _freeze_stage(rows, table: DistanceTable, new_row, n: int, exact=False):
    """Append the accepted row and fill d(k, n) for k < n in the table."""
    rows.append(tuple(new_row))
    nb = _two_point_beta(rows[n])
    for k in range(n):
        kb = _two_point_beta(rows[k]) if nb is not None else None
        if nb is not None and kb is not None:
            table.set_d(k, n, abs(kb - nb) + min(kb, nb) * table.d(k - 1, n - 1))
        else:
            plan = pair_distance(table, rows, k, n, exact=exact,
                                 allow_greedy=True)
            table.set_d(k, n, plan.objective)
    table.residuals.append(residual_from_table(table, rows[n], n))


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of ys against xs."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xm, ym = x.mean(), y.mean()
    return float(((x - xm) * (y - ym)).sum() / ((x - xm) ** 2).sum())


# ---------------------------------------------------------------------------
# monotone stage quadratic

def _stage_quadratic(rows, table: DistanceTable, n: int):
    """Objective of the monotone stage as lin . x + x^T Q x over x in R^{n+1}."""
    dcol = np.array(_dcol(table, n), dtype=float)
    lin = np.zeros(n + 1)
    Q = np.zeros((n + 1, n + 1))
    lin[0] = 1.0
    for k in range(1, n + 1):
        m = k - 1
        prow = rows[m]
        lin[k] = sum(prow[i] * dcol[i] for i in range(m + 1))
        Q[k, : m + 1] -= dcol[: m + 1]
        base = table.d(m - 1, n - 1)
        for j in range(m + 1, n + 1):
            Q[k, j] += table.d(m - 1, j - 1) - base
    return lin, Q


def _repair_monotone(x: np.ndarray, prev, n: int) -> np.ndarray:
    """Project a candidate onto the monotone stage polytope (cheap exact repair)."""
    x = np.maximum(x, 0.0)
    out = np.empty(n + 1)
    for k in range(n):
        out[k] = min(x[k], prev[k])
    s = math.fsum(out[:n])
    if s > 0.5:
        scale = 0.5 / s
        out[:n] *= scale
        s = math.fsum(out[:n])
    out[n] = 1.0 - s
    return out


def _ms_stage(rows, table: DistanceTable, n: int, cfg: OptimizerConfig,
              rng: np.random.Generator) -> np.ndarray:
    lin, Q = _stage_quadratic(rows, table, n)
    H = Q + Q.T
    prev = rows[n - 1]

    def f(x):
        return float(lin @ x + x @ Q @ x)

    def grad(x):
        return lin + H @ x

    cons = [{"type": "eq", "fun": lambda x: x.sum() - 1.0,
             "jac": lambda x: np.ones_like(x)}]
    A = np.zeros((n + 1, n + 1))
    ub = np.zeros(n + 1)
    for k in range(n):
        A[k, k] = -1.0
        ub[k] = prev[k]
    A[n, n] = 1.0
    ub[n] = -0.5
    cons.append({"type": "ineq", "fun": lambda x: ub + A @ x, "jac": lambda x: A})
    bounds = [(0.0, 1.0)] * (n + 1)

    starts = [_repair_monotone(np.array(prev[:n] + (0.0,)) * 0.5, prev, n)]
    nstarts = max(2, min(cfg.restarts, 8 if n > 20 else cfg.restarts))
    for _ in range(nstarts - 1):
        cand = rng.dirichlet(np.ones(n + 1))
        starts.append(_repair_monotone(cand, prev, n))
    best, best_val = None, math.inf
    for x0 in starts:
        res = minimize(f, x0, jac=grad, method="SLSQP", bounds=bounds,
                       constraints=cons,
                       options={"maxiter": 300, "ftol": 1e-14})
        x = _repair_monotone(res.x, prev, n)
        val = f(x)
        if val < best_val - 1e-15 or (best is None):
            best, best_val = x, val
    return best


# ---------------------------------------------------------------------------
# free (non-monotone) stage via projected Nelder-Mead

def _s_stage(rows, table: DistanceTable, n: int, cfg: OptimizerConfig,
             rng: np.random.Generator, rows_monotone: bool,
             warm: Optional[np.ndarray]) -> np.ndarray:
    ev = StageEvaluator(rows, table, n, rows_monotone)

    def f(x):
        p = project_simplex(np.asarray(x, dtype=float))
        return ev.surrogate(p)

    starts = []
    best, best_val = None, math.inf
    if warm is not None:
        # the warm start is itself a feasible candidate; keep it as the
        # incumbent so the search can only improve on it
        w = project_simplex(np.asarray(warm, dtype=float))
        starts.append(w)
        best, best_val = w, ev.exact(w)
    starts.append(np.full(n + 1, 1.0 / (n + 1)))
    for _ in range(max(0, cfg.restarts - len(starts))):
        starts.append(rng.dirichlet(np.ones(n + 1)))
    budget = max(200, cfg.max_evals // max(1, len(starts)))
    for x0 in starts:
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"maxfev": budget, "xatol": 1e-12,
                                "fatol": 1e-14, "adaptive": n > 6})
        x = project_simplex(res.x)
        val = ev.exact(x)
        if val < best_val:
            best, best_val = x, val
    # re-search from the incumbent on the tightened surrogate until stable
    for _ in range(6):
        res = minimize(f, best, method="Nelder-Mead",
                       options={"maxfev": budget, "xatol": 1e-12,
                                "fatol": 1e-14, "adaptive": n > 6})
        x = project_simplex(res.x)
        val = ev.exact(x)
        if val < best_val - 1e-13:
            best, best_val = x, val
        else:
            break
    return best, ev


def optimize_sequential(N: int, cfg: OptimizerConfig = None, monotone: bool = True,
                        exact: bool = False) -> OptimizationResult:
    """Stagewise optimization of the rows; `monotone` picks the restricted
    quadratic stages, otherwise the free transport-backed search."""
    cfg = cfg or OptimizerConfig()
    if exact:
        return _exact_sequential(N, monotone)
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    rows: List[tuple] = [(1.0,)]
    table = empty_table(N)
    table.residuals.append(1.0)
    stage_values = []
    certificates = []
    for n in range(1, N + 1):
        if monotone:
            x = _ms_stage(rows, table, n, cfg, rng)
            obj = float(stage_residual(rows, table, x, n, True))
            _freeze_stage(rows, table, tuple(float(v) for v in x), n)
        else:
            # the restricted quadratic stage is exact under monotone rows and
            # still a strong heuristic start otherwise; the free search only
            # accepts exact-evaluated improvements over it
            warm = _ms_stage(rows, table, n, cfg, rng)
            x, ev = _s_stage(rows, table, n, cfg, rng, _rows_monotone(rows), warm)
            obj = ev.exact(x)
            ev.freeze(rows, tuple(float(v) for v in x))
        stage_values.append(obj)
        certificates.append(abs(obj - float(table.residuals[n])))
    arr = TriangularArray(rows)
    return OptimizationResult(arr, list(table.residuals), stage_values, {},
                              certificates, time.perf_counter() - t0, table)


def _rows_monotone(rows) -> bool:
    for n in range(1, len(rows)):
        if rows[n][n] <= 0:
            return False
        for i in range(n):
            if rows[n][i] > rows[n - 1][i] + 1e-12:
                return False
    return True


# ---------------------------------------------------------------------------
# fixed horizon

FH_LIMIT = 8


def optimize_fixed_horizon(N: int, cfg: OptimizerConfig = None,
                           exact: bool = False) -> OptimizationResult:
    """Joint minimization of R_N over all rows pi^1..pi^N.

    Practical limit N <= 8 (the joint problem degrades quickly beyond);
    use the sequential mode for longer horizons.  The result is a certified
    upper bound on the optimal value, not a global-optimality claim.
    """
    cfg = cfg or OptimizerConfig()
    if N > FH_LIMIT:
        raise OptimizeInputError(
            f"fixed-horizon mode is limited to N <= {FH_LIMIT}; "
            "use optimize_sequential for longer horizons")
    if exact:
        if N == 1:
            return _exact_sequential(1, monotone=False)
        raise OptimizeInputError("exact fixed-horizon mode supports N = 1 only")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    sizes = [n + 1 for n in range(1, N + 1)]
    offsets = np.cumsum([0] + sizes)

    def unpack(x):
        rows = [(1.0,)]
        for idx, size in enumerate(sizes):
            seg = project_simplex(np.asarray(x[offsets[idx]:offsets[idx + 1]],
                                             dtype=float))
            rows.append(tuple(seg))
        return rows

    def objective(x):
        arr = TriangularArray(unpack(x))
        table, _ = build_distance_table(arr)
        return float(table.residuals[N])

    starts = []
    seq = optimize_sequential(N, OptimizerConfig(restarts=4, seed=cfg.seed))
    starts.append(np.concatenate([np.asarray(r) for r in seq.array.rows[1:]]))
    for _ in range(cfg.restarts - 1):
        starts.append(np.concatenate([rng.dirichlet(np.ones(s)) for s in sizes]))

    best_x, best_val = None, math.inf
    budget = max(400, cfg.max_evals // max(1, len(starts)))
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxfev": budget, "xatol": 1e-11, "fatol": 1e-13,
                                "adaptive": N > 3})
        if res.fun < best_val:
            best_x, best_val = res.x, res.fun

    # coordinate-descent polish: re-optimize one row at a time
    rows = unpack(best_x)
    for _ in range(4):
        improved = False
        for stage in range(1, N + 1):
            def stage_obj(seg, stage=stage):
                trial = list(rows)
                trial[stage] = tuple(project_simplex(np.asarray(seg, dtype=float)))
                table, _ = build_distance_table(TriangularArray(trial))
                return float(table.residuals[N])

            res = minimize(stage_obj, np.asarray(rows[stage]), method="Nelder-Mead",
                           options={"maxfev": 2000, "xatol": 1e-12, "fatol": 1e-15})
            if res.fun < best_val - 1e-14:
                rows[stage] = tuple(project_simplex(res.x))
                best_val = res.fun
                improved = True
        if not improved:
            break

    arr = TriangularArray(rows)
    table, _ = build_distance_table(arr)
    return OptimizationResult(arr, list(table.residuals),
                              [float(table.residuals[N])], {},
                              [abs(best_val - float(table.residuals[N]))],
                              time.perf_counter() - t0, table)


# ---------------------------------------------------------------------------
# scheme-constrained stage search

SCHEME_PARAMS = {
    "halpern": 1,
    "km": 1,
    "inertial-halpern": 2,
    "inertial-km": 2,
    "km-halpern": 2,
    "extra-km": 2,
    "ishikawa": 2,
}


def _scheme_row(kind: str, n: int, rows, params) -> Optional[tuple]:
    """Row n of the scheme given frozen earlier rows; None if infeasible."""
    prev = rows[n - 1]
    prev = tuple(prev) + (0.0,) * (n + 1 - len(prev))
    if kind == "halpern":
        (b,) = params
        row = [1.0 - b] + [0.0] * (n - 1) + [b]
    elif kind == "km":
        (a,) = params
        row = [(1.0 - a) * w for w in prev]
        row[n] += a
    else:
        a, b = params
        if a < 0 or b < 0 or a + b > 1:
            return None
        if kind == "inertial-halpern":
            row = [1.0 - a - b] + [0.0] * n
            row[n - 1] += b
            row[n] += a
        elif kind == "inertial-km":
            row = [(1.0 - a - b) * w for w in prev]
            row[n - 1] += b
            row[n] += a
        elif kind == "km-halpern":
            row = [b * w for w in prev]
            row[0] += 1.0 - a - b
            row[n] += a
        elif kind == "extra-km":
            base = rows[n - 2] if n >= 2 else rows[n - 1]
            base = tuple(base) + (0.0,) * (n + 1 - len(base))
            row = [(1.0 - a - b) * w for w in base]
            for i in range(len(prev)):
                row[i] += b * prev[i]
            row[n] += a
        else:
            return None
    if any(w < 0 for w in row):
        return None
    return tuple(row)


def _golden(f, lo, hi, iters=60):
    phi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


# stepsizes under which row n degenerates to the previous row padded with 0
_CARRY_PARAMS = {
    "km": (0.0,),
    "extra-km": (0.0, 1.0),
    "inertial-km": (0.0, 0.0),
    "km-halpern": (0.0, 1.0),
}


def optimize_scheme(kind: str, N: int, cfg: OptimizerConfig = None) -> OptimizationResult:
    """Stagewise search over the scheme's stepsize parameters.

    Grid plus golden-section refinement for 1-parameter families, grid plus
    Nelder-Mead for 2-parameter ones; Ishikawa optimizes its (alpha, beta)
    pair over each 2-stage block.
    """
    if kind not in SCHEME_PARAMS:
        raise OptimizeInputError(f"unknown scheme kind {kind!r}")
    cfg = cfg or OptimizerConfig()
    t0 = time.perf_counter()
    rows: List[tuple] = [(1.0,)]
    table = empty_table(N)
    table.residuals.append(1.0)
    stage_values = []
    coeffs: Dict[str, list] = {"alpha": [0.0], "beta": [0.0]}
    certificates = []
    if kind == "ishikawa":
        return _optimize_ishikawa(N, cfg, t0)

    for n in range(1, N + 1):
        mono = _rows_monotone(rows)
        ev = StageEvaluator(rows, table, n, mono)

        def obj(params, n=n):
            row = _scheme_row(kind, n, rows, params)
            if row is None:
                return math.inf
            return ev.surrogate(row)

        best_params, best_exact = None, math.inf
        carry = _CARRY_PARAMS.get(kind)
        if carry is not None:
            # parameters reproducing the previous row (padded); guarantees
            # the accepted stage value never exceeds R_{n-1}
            crow = _scheme_row(kind, n, rows, carry)
            if crow is not None:
                best_params, best_exact = carry, ev.exact(crow)
        for _ in range(3):  # repeat search while exact solves tighten the pools
            if SCHEME_PARAMS[kind] == 1:
                grid = np.linspace(0.0, 1.0, 65)
                vals = [obj((g,)) for g in grid]
                k = int(np.argmin(vals))
                lo = grid[max(0, k - 1)]
                hi = grid[min(len(grid) - 1, k + 1)]
                x, _v = _golden(lambda t: obj((t,)), lo, hi, iters=70)
                params = (x,)
            else:
                grid = np.linspace(0.0, 1.0, 17)
                best_p, best_v = (0.0, 0.0), math.inf
                for a in grid:
                    for b in grid:
                        if a + b > 1:
                            continue
                        v = obj((a, b))
                        if v < best_v:
                            best_p, best_v = (a, b), v
                res = minimize(lambda p: obj(tuple(p)), np.array(best_p),
                               method="Nelder-Mead",
                               options={"maxfev": 2000, "xatol": 1e-11,
                                        "fatol": 1e-14})
                params = tuple(np.clip(res.x, 0.0, 1.0))
                if obj(params) > best_v:
                    params = best_p
            row = _scheme_row(kind, n, rows, params)
            sur = ev.surrogate(row)  # before harvesting, to detect a stale model
            val = ev.exact(row)
            if val < best_exact:
                best_params, best_exact = params, val
            if abs(val - sur) <= 1e-9:
                break
        params, val = best_params, best_exact
        row = _scheme_row(kind, n, rows, params)
        ev.freeze(rows, row)
        stage_values.append(val)
        certificates.append(abs(val - float(table.residuals[n])))
        if SCHEME_PARAMS[kind] == 1:
            key = "beta" if kind == "halpern" else "alpha"
            coeffs[key].append(params[0])
        else:
            coeffs["alpha"].append(params[0])
            coeffs["beta"].append(params[1])
    arr = TriangularArray(rows)
    return OptimizationResult(arr, list(table.residuals), stage_values, coeffs,
                              certificates, time.perf_counter() - t0, table)


def _optimize_ishikawa(N: int, cfg: OptimizerConfig, t0: float) -> OptimizationResult:
    """Blockwise (alpha_k, beta_k) search with 0 <= alpha <= beta <= 1.

    Odd rows use extra-KM parameters (beta, 1 - beta); even rows (alpha, 0).
    """
    rows: List[tuple] = [(1.0,)]
    table = empty_table(N)
    table.residuals.append(1.0)
    stage_values = []
    coeffs: Dict[str, list] = {"alpha": [], "beta": []}
    certificates = []

    n = 1
    while n <= N:
        last = min(n + 1, N)

        def block_obj(p, n=n, last=last):
            b, a = p
            if not (0 <= a <= b <= 1):
                return math.inf
            trial_rows = list(rows)
            trial_table_vals = []
            for stage, prm in ((n, (b, 1 - b)), (n + 1, (a, 0.0))):
                if stage > last:
                    break
                row = _scheme_row("extra-km", stage, trial_rows, prm)
                if row is None:
                    return math.inf
                val = float(stage_residual(trial_rows, table, row, stage,
                                           _rows_monotone(trial_rows)))
                trial_rows.append(row)
                # temporarily freeze intra-block distances
                if stage < last:
                    for k in range(stage):
                        plan = pair_distance(table, trial_rows, k, stage,
                                             allow_greedy=True)
                        trial_table_vals.append((k, stage, table.d(k, stage)))
                        table.set_d(k, stage, plan.objective)
                else:
                    for k, s, old in reversed(trial_table_vals):
                        table.set_d(k, s, old)
                    return val
            for k, s, old in reversed(trial_table_vals):
                table.set_d(k, s, old)
            return val

        grid = np.linspace(0.0, 1.0, 13)
        best_p, best_v = (0.5, 0.5), math.inf
        for b in grid:
            for a in grid:
                if a > b:
                    continue
                v = block_obj((b, a))
                if v < best_v:
                    best_p, best_v = (b, a), v
        res = minimize(block_obj, np.array(best_p), method="Nelder-Mead",
                       options={"maxfev": 1500, "xatol": 1e-10, "fatol": 1e-13})
        p = tuple(np.clip(res.x, 0.0, 1.0))
        if block_obj(p) > best_v:
            p = best_p
        b, a = p
        coeffs["beta"].append(b)
        coeffs["alpha"].append(a)
        row = _scheme_row("extra-km", n, rows, (b, 1 - b))
        _freeze_stage(rows, table, row, n)
        stage_values.append(float(table.residuals[n]))
        certificates.append(0.0)
        if n + 1 <= N:
            row = _scheme_row("extra-km", n + 1, rows, (a, 0.0))
            _freeze_stage(rows, table, row, n + 1)
            stage_values.append(float(table.residuals[n + 1]))
            certificates.append(0.0)
        n += 2
    arr = TriangularArray(rows)
    return OptimizationResult(arr, list(table.residuals), stage_values, coeffs,
                              certificates, time.perf_counter() - t0, table)


# ---------------------------------------------------------------------------
# exact-rational stages (global, via KKT enumeration over polytope faces)

def _gauss_solve(A: List[List[Fraction]], b: List[Fraction]):
    """Exact Gaussian elimination; returns None for singular systems."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [x / pv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def _exact_qp(lin, Q, ineqs, d):
    """Global minimum of lin.x + x^T Q x over {sum x = 1, a.x <= b for (a, b) in ineqs}.

    Enumerates KKT systems over all active subsets; the global minimum of a
    quadratic over a polytope is stationary on the relative interior of some
    face, so it appears among the candidates.  Ties break to the
    lexicographically smallest point.
    """
    H = [[Q[i][j] + Q[j][i] for j in range(d)] for i in range(d)]
    ones = [Fraction(1)] * d
    best = None
    for r in range(min(d, len(ineqs)) + 1):
        for subset in itertools.combinations(range(len(ineqs)), r):
            act = [ineqs[i] for i in subset]
            k = 1 + len(act)
            size = d + k
            A = [[Fraction(0)] * size for _ in range(size)]
            rhs = [Fraction(0)] * size
            for i in range(d):
                for j in range(d):
                    A[i][j] = H[i][j]
                A[i][d] = ones[i]
                for t, (a, _) in enumerate(act):
                    A[i][d + 1 + t] = a[i]
                rhs[i] = -lin[i]
            for j in range(d):
                A[d][j] = ones[j]
            rhs[d] = Fraction(1)
            for t, (a, b) in enumerate(act):
                for j in range(d):
                    A[d + 1 + t][j] = a[j]
                rhs[d + 1 + t] = b
            sol = _gauss_solve(A, rhs)
            if sol is None:
                continue
            x = sol[:d]
            if any(sum(a[j] * x[j] for j in range(d)) > b for (a, b) in ineqs):
                continue
            val = sum(lin[i] * x[i] for i in range(d)) + \
                sum(x[i] * Q[i][j] * x[j] for i in range(d) for j in range(d))
            cand = (val, x)
            if best is None or val < best[0] or (val == best[0] and x < best[1]):
                best = cand
    if best is None:
        raise OptimizeInputError("empty feasible polytope in exact stage")
    return best


def _exact_stage_quadratic(rows, table, n):
    dcol = [table.d(i - 1, n - 1) for i in range(n + 1)]
    lin = [Fraction(0)] * (n + 1)
    Q = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
    lin[0] = Fraction(1)
    for k in range(1, n + 1):
        m = k - 1
        prow = rows[m]
        lin[k] = sum(Fraction(prow[i]) * dcol[i] for i in range(m + 1))
        for i in range(m + 1):
            Q[k][i] -= dcol[i]
        base = table.d(m - 1, n - 1)
        for j in range(m + 1, n + 1):
            Q[k][j] += table.d(m - 1, j - 1) - base
    return lin, Q


EXACT_MS_LIMIT = 4
EXACT_S_LIMIT = 2


def _exact_ms_stage(rows, table, n):
    lin, Q = _exact_stage_quadratic(rows, table, n)
    ineqs = []
    for i in range(n + 1):
        a = [Fraction(0)] * (n + 1)
        a[i] = Fraction(-1)
        ineqs.append((a, Fraction(0)))  # x_i >= 0
    prev = rows[n - 1]
    for k in range(n):
        a = [Fraction(0)] * (n + 1)
        a[k] = Fraction(1)
        ineqs.append((a, Fraction(prev[k])))
    a = [Fraction(0)] * (n + 1)
    a[n] = Fraction(-1)
    ineqs.append((a, Fraction(-1, 2)))  # x_n >= 1/2
    return _exact_qp(lin, Q, ineqs, n + 1)


def _spanning_cells(M, N):
    """Cell sets of size M+N-1 forming spanning trees of the bipartite graph."""
    cells = [(i, j) for i in range(M) for j in range(N)]
    for combo in itertools.combinations(cells, M + N - 1):
        # connectivity + acyclicity via union-find
        parent = list(range(M + N))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for (i, j) in combo:
            ri, rj = find(i), find(M + j)
            if ri == rj:
                ok = False
                break
            parent[ri] = rj
        if ok and len({find(x) for x in range(M + N)}) == 1:
            yield combo


def _tree_flows_affine(combo, a_fixed, M, N, d):
    """Flows on a spanning tree as affine functions of the target margins.

    Each flow is a vector [const, coef_b0, ..., coef_b{N-1}]; source margins
    a_fixed are exact constants.
    """
    zero = [Fraction(0)] * (N + 1)
    margins_s = []
    for ai in a_fixed:
        v = zero[:]
        v[0] = Fraction(ai)
        margins_s.append(v)
    margins_t = []
    for j in range(N):
        v = zero[:]
        v[1 + j] = Fraction(1)
        margins_t.append(v)
    deg = {}
    for (i, j) in combo:
        deg[("s", i)] = deg.get(("s", i), 0) + 1
        deg[("t", j)] = deg.get(("t", j), 0) + 1
    remaining = set(combo)
    flows = {}
    while remaining:
        leaf_cell = None
        for (i, j) in remaining:
            if deg[("s", i)] == 1:
                leaf_cell, node = (i, j), ("s", i)
                break
            if deg[("t", j)] == 1:
                leaf_cell, node = (i, j), ("t", j)
                break
        i, j = leaf_cell
        if node[0] == "s":
            flows[(i, j)] = margins_s[i][:]
            margins_t[j] = [x - y for x, y in zip(margins_t[j], flows[(i, j)])]
        else:
            flows[(i, j)] = margins_t[j][:]
            margins_s[i] = [x - y for x, y in zip(margins_s[i], flows[(i, j)])]
        remaining.discard(leaf_cell)
        deg[("s", i)] -= 1
        deg[("t", j)] -= 1
    return flows


def _exact_s_stage(rows, table, n):
    """Global exact free stage for n <= EXACT_S_LIMIT.

    Transport costs d(k, n) are minima over spanning-tree basic plans whose
    flows are affine in the candidate row; enumerating the plan choice per
    pair turns the stage into finitely many exact QPs with the plans'
    feasibility inequalities appended.
    """
    if n > EXACT_S_LIMIT:
        raise OptimizeInputError(
            f"exact free-stage mode supports n <= {EXACT_S_LIMIT}")
    d = n + 1
    base_ineqs = []
    for i in range(d):
        a = [Fraction(0)] * d
        a[i] = Fraction(-1)
        base_ineqs.append((a, Fraction(0)))

    # k = 1 term: source is the Dirac row, unique plan z_{0j} = x_j
    lin0 = [Fraction(0)] * d
    Q0 = [[Fraction(0)] * d for _ in range(d)]
    lin0[0] = Fraction(1)
    c0 = [table.d(-1, j - 1) for j in range(d)]
    if n >= 1:
        for j in range(d):
            Q0[1][j] += Fraction(c0[j])

    branch_sets = []
    for k in range(2, n + 1):
        m = k - 1
        M, N_ = m + 1, d
        costs = [[table.d(i - 1, j - 1) for j in range(d)] for i in range(M)]
        choices = []
        for combo in _spanning_cells(M, N_):
            flows = _tree_flows_affine(combo, rows[m], M, N_, d)
            cost_vec = [Fraction(0)] * (d + 1)
            for (i, j), fv in flows.items():
                cij = Fraction(costs[i][j])
                cost_vec = [cv + cij * f for cv, f in zip(cost_vec, fv)]
            feas = []
            for fv in flows.values():
                a = [-fv[1 + t] for t in range(d)]
                feas.append((a, fv[0]))  # flow >= 0  <=>  -coef.x <= const
            choices.append((k, cost_vec, feas))
        branch_sets.append(choices)

    best = None
    for branch in itertools.product(*branch_sets) if branch_sets else [()]:
        lin = lin0[:]
        Q = [row[:] for row in Q0]
        ineqs = [(a[:], b) for a, b in base_ineqs]
        for (k, cost_vec, feas) in branch:
            lin[k] += cost_vec[0]
            for j in range(d):
                Q[k][j] += cost_vec[1 + j]
            ineqs.extend(feas)
        try:
            val, x = _exact_qp(lin, Q, ineqs, d)
        except OptimizeInputError:
            continue
        if best is None or val < best[0] or (val == best[0] and x < best[1]):
            best = (val, x)
    return best


def _exact_sequential(N: int, monotone: bool) -> OptimizationResult:
    limit = EXACT_MS_LIMIT if monotone else EXACT_S_LIMIT
    if N > limit:
        raise OptimizeInputError(
            f"exact mode supports N <= {limit} for this strategy")
    t0 = time.perf_counter()
    rows: List[tuple] = [(Fraction(1),)]
    table = empty_table(N)
    table.residuals.append(Fraction(1))
    stage_values = []
    for n in range(1, N + 1):
        if monotone:
            val, x = _exact_ms_stage(rows, table, n)
        else:
            val, x = _exact_s_stage(rows, table, n)
        _freeze_stage(rows, table, tuple(x), n, exact=True)
        stage_values.append(val)
        assert val == table.residuals[n]
    arr = TriangularArray(rows)
    return OptimizationResult(arr, list(table.residuals), stage_values, {},
                              [0] * N, time.perf_counter() - t0, table)
