"""Coefficient-row builders for the named iteration families.

Each scheme maps stepsize sequences (alpha_n, beta_n) to rows of the
triangular averaging array.  Row 0 is always the Dirac mass at index 0
(the convention that places all initial mass on the starting point), and
stepsizes start acting at n = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

SCHEME_KINDS = (
    "halpern",
    "km",
    "inertial-halpern",
    "inertial-km",
    "km-halpern",
    "extra-km",
    "ishikawa",
    "general",
)

FORMULAS = ("constant", "n/(n+1)", "n/(n+2)", "(n+1)/(n+3)", "optimal-recursion",
            "explicit-list")


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class TriangularArray:
    """Rows of averaging coefficients; row n lives on the simplex over 0..n."""

    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))

    @property
    def horizon(self) -> int:
        return len(self.rows) - 1

    def row(self, n: int):
        return self.rows[n]

    def validate(self, exact: bool = False) -> None:
        tol = 0 if exact else 1e-12
        if not self.rows or len(self.rows[0]) != 1 or abs(self.rows[0][0] - 1) > tol:
            raise SchemeError("row 0 must be the Dirac mass at index 0")
        for n, row in enumerate(self.rows):
            if len(row) != n + 1:
                raise SchemeError(f"row {n} has support size {len(row)}, expected {n + 1}")
            if any(w < -tol for w in row):
                raise SchemeError(f"row {n} has a negative weight")
            if abs(sum(row) - 1) > max(tol, 1e-12):
                raise SchemeError(f"row {n} does not sum to 1")


@dataclass(frozen=True)
class MonotoneReport:
    monotone: bool
    first_violation: Optional[tuple]  # (n, i) or None
    tail_ok: bool        # pi^m_m >= sum_{i=m}^{n-1} pi^n_i for all m < n
    half_ok: bool        # pi^n_n >= 1/2 for n >= 1


@dataclass(frozen=True)
class SchemeSpec:
    """A named iteration family plus its stepsize sequences.

    For kind "general", `rows` carries a user-supplied array directly.
    """

    kind: str
    alphas: Optional[tuple] = None
    betas: Optional[tuple] = None
    rows: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise SchemeError(f"unknown scheme kind {self.kind!r}")
        for name in ("alphas", "betas"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))


def _step(seq, n, what):
    if seq is None or len(seq) <= n:
        raise SchemeError(f"missing {what}[{n}]")
    s = seq[n]
    if not (0 <= s <= 1):
        raise SchemeError(f"{what}[{n}] = {s} outside [0, 1]")
    return s


def _pad(prev, length):
    return tuple(prev) + (0,) * (length - len(prev))


def build_rows(spec: SchemeSpec, N: int) -> TriangularArray:
    """Unroll the scheme recursions into an explicit triangular array."""
    if spec.kind == "general":
        if spec.rows is None:
            raise SchemeError("kind 'general' requires explicit rows")
        arr = TriangularArray(spec.rows[: N + 1])
        arr.validate()
        return arr
    if spec.kind == "ishikawa":
        return _ishikawa_rows(spec, N)
    one = _one_like(spec)
    rows = [(one,)]
    for n in range(1, N + 1):
        prev = rows[n - 1]
        prev2 = rows[n - 2] if n >= 2 else None
        if spec.kind == "halpern":
            b = _step(spec.betas, n, "beta")
            row = [one - b] + [0] * (n - 1) + [b]
        elif spec.kind == "km":
            a = _step(spec.alphas, n, "alpha")
            row = [(one - a) * w for w in _pad(prev, n + 1)]
            row[n] += a
        elif spec.kind == "inertial-halpern":
            a = _step(spec.alphas, n, "alpha")
            b = _step(spec.betas, n, "beta")
            _check_pair(a, b, n)
            row = [one - a - b] + [0] * n
            row[n - 1] += b
            row[n] += a
        elif spec.kind == "inertial-km":
            a = _step(spec.alphas, n, "alpha")
            b = _step(spec.betas, n, "beta")
            _check_pair(a, b, n)
            row = [(one - a - b) * w for w in _pad(prev, n + 1)]
            row[n - 1] += b
            row[n] += a
        elif spec.kind == "km-halpern":
            a = _step(spec.alphas, n, "alpha")
            b = _step(spec.betas, n, "beta")
            _check_pair(a, b, n)
            row = [b * w for w in _pad(prev, n + 1)]
            row[0] += one - a - b
            row[n] += a
        elif spec.kind == "extra-km":
            a = _step(spec.alphas, n, "alpha")
            b = _step(spec.betas, n, "beta")
            _check_pair(a, b, n)
            base = prev2 if prev2 is not None else prev
            row = [(one - a - b) * w for w in _pad(base, n + 1)]
            for i, w in enumerate(prev):
                row[i] += b * w
            row[n] += a
        else:  # pragma: no cover
            raise SchemeError(spec.kind)
        rows.append(tuple(row))
    arr = TriangularArray(rows)
    arr.validate()
    return arr


def _check_pair(a, b, n):
    if a + b > 1:
        raise SchemeError(f"alpha[{n}] + beta[{n}] = {a + b} > 1 gives a negative weight")


def _one_like(spec):
    for seq in (spec.alphas, spec.betas):
        if seq:
            for s in seq:
                if isinstance(s, Fraction):
                    return Fraction(1)
    return 1


def _ishikawa_rows(spec: SchemeSpec, N: int) -> TriangularArray:
    """Ishikawa as the stated extra-KM special case.

    Odd rows use extra-KM parameters (beta_k, 1 - beta_k); even rows use
    (alpha_k, 0).  Requires 0 <= alpha_k <= beta_k <= 1 blockwise.
    """
    alphas: list = [0]
    betas: list = [0]
    for n in range(1, N + 1):
        k = (n - 1) // 2
        a = _step(spec.alphas, k, "alpha")
        b = _step(spec.betas, k, "beta")
        if a > b:
            raise SchemeError(f"ishikawa requires alpha[{k}] <= beta[{k}]")
        if n % 2 == 1:
            alphas.append(b)
            betas.append(1 - b)
        else:
            alphas.append(a)
            betas.append(0)
    return build_rows(SchemeSpec("extra-km", alphas=alphas, betas=betas), N)


def check_monotone(pi: TriangularArray, exact: bool = False) -> MonotoneReport:
    """Row-monotonicity check enabling the greedy transport fast path."""
    tol = 0 if exact else 1e-12
    first = None
    tail_ok = True
    half_ok = True
    half = Fraction(1, 2) if exact else 0.5
    for n in range(1, pi.horizon + 1):
        row, prev = pi.rows[n], pi.rows[n - 1]
        if row[n] <= tol and first is None:
            first = (n, n)
        for i in range(n):
            if row[i] > prev[i] + tol and first is None:
                first = (n, i)
        if row[n] < half - tol:
            half_ok = False
        for m in range(n):
            if pi.rows[m][m] < sum(row[m:n]) - tol:
                tail_ok = False
                break
    return MonotoneReport(first is None, first, tail_ok, half_ok)


def stepsize_formula(name: str, value=None, values: Sequence = None) -> Callable[[int], object]:
    """Resolve a stepsize formula name to a function of the iteration index."""
    if name == "constant":
        if value is None:
            raise SchemeError("formula 'constant' needs a value")
        return lambda n: value
    if name == "n/(n+1)":
        return lambda n: n / (n + 1)
    if name == "n/(n+2)":
        return lambda n: n / (n + 2)
    if name == "(n+1)/(n+3)":
        return lambda n: (n + 1) / (n + 3)
    if name == "optimal-recursion":
        from .halpern import optimal_recursion

        cache = {}

        def beta(n, _cache=cache):
            if "betas" not in _cache or len(_cache["betas"]) <= n:
                _cache["betas"] = optimal_recursion(max(n, 64))[0]
            return _cache["betas"][n]

        return beta
    if name == "explicit-list":
        if values is None:
            raise SchemeError("formula 'explicit-list' needs values")
        vals = tuple(values)
        return lambda n: vals[n]
    raise SchemeError(f"unknown stepsize formula {name!r}")


def _expand_steps(v, horizon: int) -> Optional[tuple]:
    if v is None:
        return None
    if isinstance(v, (list, tuple)):
        return tuple(v)
    if isinstance(v, dict):
        fn = stepsize_formula(v["formula"], v.get("value"), v.get("values"))
    else:
        fn = stepsize_formula(str(v))
    return tuple(fn(n) for n in range(horizon + 1))


def scheme_from_json(doc: dict, horizon: int) -> SchemeSpec:
    """Build a SchemeSpec from a JSON/CLI description.

    Expected keys: "kind"; optionally "alpha"/"beta", each either an explicit
    list, a formula name, or {"formula": name, "value": c}; kind "general"
    takes explicit "rows" instead.
    """
    kind = doc.get("kind")
    if kind not in SCHEME_KINDS:
        raise SchemeError(f"unknown scheme kind {kind!r}")
    if kind == "general":
        rows = doc.get("rows")
        if rows is None:
            raise SchemeError("kind 'general' requires rows")
        return SchemeSpec("general", rows=tuple(tuple(r) for r in rows))
    return SchemeSpec(kind,
                      alphas=_expand_steps(doc.get("alpha"), horizon),
                      betas=_expand_steps(doc.get("beta"), horizon))
