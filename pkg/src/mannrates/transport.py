"""Exact solvers for the small transportation problems between coefficient rows.

Two routes are provided: a transportation simplex (`solve_transport`) that
returns an optimal basic plan together with dual multipliers, and a greedy
closed-form construction (`greedy_monotone_transport`) valid under the
monotone-row preconditions.  Both work over floats and over
`fractions.Fraction` (pass ``exact=True`` for zero-tolerance comparisons).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

FEAS_TOL = 1e-10
DUAL_TOL = 1e-9

_MAX_PIVOTS = 200_000


class TransportError(Exception):
    pass


class TransportInputError(TransportError):
    """Invalid margins or mismatched dimensions."""


class CyclingError(TransportError):
    """Pivot guard exceeded; must not happen with Bland's rule."""


class MonotonePreconditionError(TransportError):
    """Greedy plan preconditions do not hold; fall back to solve_transport."""


@dataclass(frozen=True)
class Distribution:
    """Probability weights on support indices 0..n."""

    weights: tuple

    def __post_init__(self):
        w = tuple(self.weights)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.weights) - 1

    def validate(self, exact: bool = False) -> None:
        tol = 0 if exact else 1e-12
        if len(self.weights) == 0:
            raise TransportInputError("empty distribution")
        if any(w < -tol for w in self.weights):
            raise TransportInputError("negative weight in distribution")
        total = sum(self.weights)
        if abs(total - 1) > max(tol, 1e-12):
            raise TransportInputError(f"weights sum to {total}, expected 1")


@dataclass(frozen=True)
class CostMatrix:
    """Cost entries c[i][j] = d(i-1, j-1) between two rows' support points."""

    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(tuple(r) for r in self.entries))

    @property
    def shape(self):
        return (len(self.entries), len(self.entries[0]))


@dataclass(frozen=True)
class TransportPlan:
    """Optimal plan with dual multipliers (normalized so min dual is 0)."""

    flows: tuple  # tuple of (i, j, mass), mass > 0 (plus possibly zero basics)
    objective: object
    dual_u: tuple  # over target indices 0..n
    dual_v: tuple  # over source indices 0..m

    def flow_dict(self):
        return {(i, j): z for i, j, z in self.flows}

    def mass(self, i, j):
        return self.flow_dict().get((i, j), 0)


def _check_inputs(source, target, costs, exact):
    source.validate(exact)
    target.validate(exact)
    M, N = len(source.weights), len(target.weights)
    if costs.shape != (M, N):
        raise TransportInputError(
            f"cost matrix shape {costs.shape} does not match margins ({M}, {N})"
        )


def _northwest_basis(a, b):
    """Initial basic feasible solution with exactly M+N-1 basic cells."""
    M, N = len(a), len(b)
    ar, br = list(a), list(b)
    flow = {}
    basis = []
    i = j = 0
    while True:
        t = ar[i] if ar[i] <= br[j] else br[j]
        flow[(i, j)] = t
        basis.append((i, j))
        ar[i] -= t
        br[j] -= t
        if i == M - 1 and j == N - 1:
            break
        if i < M - 1 and (ar[i] == 0 or j == N - 1):
            i += 1
        else:
            j += 1
    return flow, set(basis)


def _tree_duals(M, N, basis, c):
    """Solve u[j] - v[i] = c[i][j] on the spanning-tree basis, v[0] = 0."""
    v = [None] * M
    u = [None] * N
    adj_s = [[] for _ in range(M)]
    adj_t = [[] for _ in range(N)]
    for (i, j) in basis:
        adj_s[i].append(j)
        adj_t[j].append(i)
    v[0] = 0
    stack = [("s", 0)]
    while stack:
        kind, k = stack.pop()
        if kind == "s":
            for j in adj_s[k]:
                if u[j] is None:
                    u[j] = v[k] + c[k][j]
                    stack.append(("t", j))
        else:
            for i in adj_t[k]:
                if v[i] is None:
                    v[i] = u[k] - c[i][k]
                    stack.append(("s", i))
    if any(x is None for x in v) or any(x is None for x in u):
        raise CyclingError("basis is not a spanning tree")
    return u, v


def _tree_path(basis, entering):
    """Node path from target j_e back to source i_e through the basis tree."""
    ie, je = entering
    adj = {}
    for (i, j) in basis:
        adj.setdefault(("s", i), []).append(("t", j))
        adj.setdefault(("t", j), []).append(("s", i))
    start, goal = ("t", je), ("s", ie)
    prev = {start: None}
    stack = [start]
    while stack:
        node = stack.pop()
        if node == goal:
            break
        for nxt in adj.get(node, ()):
            if nxt not in prev:
                prev[nxt] = node
                stack.append(nxt)
    if goal not in prev:
        raise CyclingError("disconnected basis tree")
    path = [goal]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()  # from ("t", je) to ("s", ie)
    cells = []
    for a, b in zip(path, path[1:]):
        if a[0] == "t":
            cells.append((b[1], a[1]))
        else:
            cells.append((a[1], b[1]))
    return cells


def _pivot_loop(a, b, c, flow, basis, tol):
    M, N = len(a), len(b)
    for _ in range(_MAX_PIVOTS):
        u, v = _tree_duals(M, N, basis, c)
        entering = None
        for i in range(M):
            for j in range(N):
                if (i, j) not in basis and u[j] - v[i] - c[i][j] > tol:
                    entering = (i, j)
                    break
            if entering is not None:
                break
        if entering is None:
            return u, v
        cells = _tree_path(basis, entering)
        # entering gets +theta; cells alternate -,+,-,... along the cycle
        minus = cells[0::2]
        plus = cells[1::2]
        theta = min(flow[cell] for cell in minus)
        leaving = min(cell for cell in minus if flow[cell] == theta)
        flow[entering] = flow.get(entering, 0) + theta
        for cell in minus:
            flow[cell] -= theta
        for cell in plus:
            flow[cell] += theta
        basis.add(entering)
        basis.discard(leaving)
        del flow[leaving]
    raise CyclingError("pivot limit exceeded")


def _saturate_diagonal(a, b, c, flow, tol):
    """Reroute mass so that flow(i, i) = min(a_i, b_i) on shared indices.

    Valid for metric cost tables (the reroute is cost-neutral there); stops
    if a reroute would strictly increase the cost.
    """
    M, N = len(a), len(b)
    for i in range(min(M, N)):
        want = a[i] if a[i] <= b[i] else b[i]
        while flow.get((i, i), 0) < want - tol:
            row = [(jj, z) for (ii, jj), z in flow.items() if ii == i and jj != i and z > tol]
            col = [(kk, z) for (kk, jj), z in flow.items() if jj == i and kk != i and z > tol]
            if not row or not col:
                break
            j, zj = min(row)
            k, zk = min(col)
            delta = c[i][i] + c[k][j] - c[i][j] - c[k][i]
            if delta > max(tol, DUAL_TOL):
                break  # non-metric costs; keep the optimal plan as-is
            t = min(zj, zk, want - flow.get((i, i), 0))
            flow[(i, i)] = flow.get((i, i), 0) + t
            flow[(k, j)] = flow.get((k, j), 0) + t
            flow[(i, j)] -= t
            flow[(k, i)] -= t
            for cell in ((i, j), (k, i)):
                if flow[cell] <= tol and flow[cell] >= -tol:
                    flow[cell] = 0


def _potential_duals(u_raw, v_raw, c, M, N, tol):
    """Single Kantorovich potential from simplex duals via inf-convolution.

    For metric costs the potential is 1-Lipschitz, so after shifting its
    minimum to 0 all values land in [0, 1] (the Appendix-style convention).
    """
    p = [min(v_raw[i] + c[i][j] for i in range(M)) for j in range(N)]
    lo = min(p)
    p = [x - lo for x in p]
    if M > N:
        return None
    # feasibility of (p, p|source) with respect to the costs
    for i in range(M):
        for j in range(N):
            if p[j] - p[i] > c[i][j] + max(tol, DUAL_TOL):
                return None
    return p


def _finalize(a, b, c, flow, u_raw, v_raw, tol):
    M, N = len(a), len(b)
    objective = sum(z * c[i][j] for (i, j), z in flow.items())
    p = _potential_duals(u_raw, v_raw, c, M, N, tol)
    if p is not None:
        dual_obj = sum(b[j] * p[j] for j in range(N)) - sum(a[i] * p[i] for i in range(M))
        if abs(dual_obj - objective) <= max(tol, DUAL_TOL):
            dual_u, dual_v = p, p[:M]
        else:
            p = None
    if p is None:
        lo = min(min(u_raw), min(v_raw))
        dual_u = [x - lo for x in u_raw]
        dual_v = [x - lo for x in v_raw]
    flows = tuple(sorted((i, j, z) for (i, j), z in flow.items() if z > tol or (i == j)))
    return TransportPlan(flows, objective, tuple(dual_u), tuple(dual_v))


def solve_transport(source: Distribution, target: Distribution, costs: CostMatrix,
                    exact: bool = False) -> TransportPlan:
    """Minimum-cost transport plan between two rows, with optimal duals.

    Transportation simplex (u-v / MODI method) with Bland's rule.  The plan
    is post-processed to the "simple" form with flow(i, i) = min(a_i, b_i)
    on shared support indices, which preserves optimality for metric costs.
    """
    _check_inputs(source, target, costs, exact)
    tol = 0 if exact else FEAS_TOL
    a = list(source.weights)
    b = list(target.weights)
    c = costs.entries
    flow, basis = _northwest_basis(a, b)
    u, v = _pivot_loop(a, b, c, flow, basis, tol)
    _saturate_diagonal(a, b, c, flow, tol)
    return _finalize(a, b, c, flow, u, v, tol)


def greedy_monotone_transport(source: Distribution, target: Distribution,
                              costs: CostMatrix, exact: bool = False) -> TransportPlan:
    """Closed-form nested plan for monotone rows (source row m, target row n).

    Requires target_i <= source_i for i <= m and the tail condition
    source_m >= sum_{j=m}^{n-1} target_j; the cost table must additionally
    satisfy the quadrangle inequality (caller-checked).  Raises
    MonotonePreconditionError when the margin conditions fail.
    """
    _check_inputs(source, target, costs, exact)
    tol = 0 if exact else FEAS_TOL
    a = list(source.weights)
    b = list(target.weights)
    c = costs.entries
    M, N = len(a), len(b)
    if M > N:
        raise MonotonePreconditionError("source support longer than target support")
    m = M - 1
    for i in range(M):
        if b[i] > a[i] + tol:
            raise MonotonePreconditionError(f"target[{i}] > source[{i}]")
    tail = sum(b[m:N - 1])
    if a[m] < tail - tol:
        raise MonotonePreconditionError("tail condition fails")

    flow = {}
    for i in range(M):
        flow[(i, i)] = b[i]
    for j in range(m + 1, N - 1):
        flow[(m, j)] = b[j]
    for i in range(m):
        flow[(i, N - 1)] = flow.get((i, N - 1), 0) + (a[i] - b[i])
    flow[(m, N - 1)] = flow.get((m, N - 1), 0) + (a[m] - tail)
    flow = {k: (0 if -tol <= z < 0 else z) for k, z in flow.items()}
    objective = sum(z * c[i][j] for (i, j), z in flow.items())

    # Prop-2 dual solution, as a single potential over 0..n
    u = [1 - c[i][N - 1] for i in range(M)]
    u += [1 - c[m][N - 1] + c[m][j] for j in range(M, N)]
    lo = min(u)
    u = [x - lo for x in u]
    flows = tuple(sorted((i, j, z) for (i, j), z in flow.items() if z > tol or i == j))
    return TransportPlan(flows, objective, tuple(u), tuple(u[:M]))
