"""Worst-case witness: a finite sup-norm embedding attaining every bound.

Coordinates are indexed by pairs (m, n) with -1 <= m <= n <= N.  The points
y^k carry, at coordinate (-1, n), the distance d(k-1, n) and, at coordinate
(m, n), the k-th dual potential value of the transport between rows m and n
(extended beyond index n by inf-convolution with the distance table).  The
iterates x^k = sum_i pi^k_i y^i then satisfy ||x^m - x^n|| = d(m, n) and
||x^n - y^{n+1}|| = R_n exactly, certifying tightness of the bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

from .distances import DistanceTable, build_distance_table
from .schemes import TriangularArray

CERT_TOL = 1e-8


class CertificationError(Exception):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True)
class WitnessReport:
    max_distance_error: float
    max_residual_error: float
    max_expansion: float

    @property
    def ok(self) -> bool:
        return (self.max_distance_error <= CERT_TOL
                and self.max_residual_error <= CERT_TOL
                and self.max_expansion <= CERT_TOL)


@dataclass(frozen=True)
class WorstCaseWitness:
    horizon: int
    index_set: tuple      # pairs (m, n), -1 <= m <= n <= N
    ys: tuple             # y^0 .. y^{N+1}, vectors over index_set
    xs: tuple             # x^0 .. x^N
    table: DistanceTable
    report: WitnessReport

    def map_image(self, k: int):
        """T x^k = y^{k+1} on the iterate set."""
        return self.ys[k + 1]


def _extend_potential(u, table: DistanceTable, upto: int):
    """u_i = min_k (u_k + d(k-1, i-1)) for indices past the original support."""
    n = len(u) - 1
    out = list(u)
    for i in range(n + 1, upto + 1):
        out.append(min(u[k] + table.d(k - 1, i - 1) for k in range(n + 1)))
    return out


def _sup_dist(x, y):
    return max(abs(a - b) for a, b in zip(x, y))


def build_worst_case_witness(pi: TriangularArray, N: int = None,
                             table: DistanceTable = None, plans: Dict = None,
                             tol: float = CERT_TOL) -> WorstCaseWitness:
    """Construct and verify the witness for the first N rows of the array.

    Raises CertificationError (carrying the offending pair) if any of the
    three invariants fails beyond `tol`.
    """
    if N is None:
        N = pi.horizon
    if N > pi.horizon:
        raise ValueError(f"horizon {N} exceeds array horizon {pi.horizon}")
    if table is None or plans is None:
        sub = TriangularArray(pi.rows[: N + 1])
        table, plans = build_distance_table(sub, keep_plans=True)

    pairs: List[Tuple[int, int]] = [(m, n) for m in range(-1, N + 1)
                                    for n in range(m, N + 1)]
    potentials = {}
    for (m, n) in pairs:
        if m >= 0:
            potentials[(m, n)] = _extend_potential(plans[(m, n)].dual_u, table, N + 1)

    ys = []
    for k in range(N + 2):
        y = []
        for (m, n) in pairs:
            if m == -1:
                y.append(table.d(k - 1, n))
            else:
                y.append(potentials[(m, n)][k])
        ys.append(tuple(y))

    xs = []
    for k in range(N + 1):
        row = pi.rows[k]
        xs.append(tuple(sum(row[i] * ys[i][c] for i in range(k + 1))
                        for c in range(len(pairs))))

    max_dist = 0.0
    worst_pair = None
    for m in range(N + 1):
        for n in range(m, N + 1):
            err = abs(_sup_dist(xs[m], xs[n]) - table.d(m, n))
            if err > max_dist:
                max_dist, worst_pair = err, (m, n)
    max_res = 0.0
    worst_res = None
    for n in range(N + 1):
        err = abs(_sup_dist(xs[n], ys[n + 1]) - table.residuals[n])
        if err > max_res:
            max_res, worst_res = err, (n, n + 1)
    max_exp = 0.0
    worst_exp = None
    for m in range(N + 1):
        for n in range(m, N + 1):
            gap = _sup_dist(ys[m + 1], ys[n + 1]) - _sup_dist(xs[m], xs[n])
            if gap > max_exp:
                max_exp, worst_exp = gap, (m, n)

    report = WitnessReport(float(max_dist), float(max_res), float(max_exp))
    if max_dist > tol:
        raise CertificationError(
            f"distance equality off by {max_dist:.3e} at pair {worst_pair}", worst_pair)
    if max_res > tol:
        raise CertificationError(
            f"residual equality off by {max_res:.3e} at {worst_res}", worst_res)
    if max_exp > tol:
        raise CertificationError(
            f"map expands by {max_exp:.3e} at pair {worst_exp}", worst_exp)
    return WorstCaseWitness(N, tuple(pairs), tuple(ys), tuple(xs), table, report)


def witness_json(w: WorstCaseWitness) -> dict:
    """Structured document with all coordinates, 17 significant digits."""
    fmt = lambda x: float(f"{float(x):.17g}")
    return {
        "horizon": w.horizon,
        "index_set": [list(p) for p in w.index_set],
        "y": [[fmt(v) for v in y] for y in w.ys],
        "x": [[fmt(v) for v in x] for x in w.xs],
        "report": {
            "max_distance_error": w.report.max_distance_error,
            "max_residual_error": w.report.max_residual_error,
            "max_expansion": w.report.max_expansion,
        },
    }
