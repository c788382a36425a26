"""Dominance between measure pairs via the finite dual-cone conditions.

A pair (nu1, nu2) of admissible nonnegative measures dominates mod the
cone iff

  (i)   nu1 and nu2 agree (finitely) on the degree < k chain basis at s;
  (ii)  nu1 >= nu2 on the z-anchored second chain, one element per level
        in the finiteness row F_{k,n};
  (iii) nu1 >= nu2 on every positive part p+_{t;0,n}, t in I.

Condition (iii) is certified on a t-grid (atoms + quantiles + an
arctan-uniform fill); for pure-atom measures under unit gauges the margin
is piecewise polynomial in t and the check refines to exact per-piece
minimization.  Any failing condition yields a counterexample cone member.

Infinite values follow the extended-sense rules: +inf on nu1's side of an
inequality satisfies it; equality conditions must be finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import PreconditionError, UndefinedMomentError
from .gderiv import ConeSpec, FunctionRep, fn_from_wpoly
from .intervals import UnitGauge
from .measures import (
    MeasureRep,
    admissibility,
    central_moment_about,
    gmoment,
    partial_moment,
)
from .wpoly import (
    DEFAULT_QUAD,
    POSITIVE,
    QuadConfig,
    WPolyHandle,
    chain_az_handle,
    chain_t_handle,
    chain_t_two_arg,
    finiteness_set,
)

__all__ = [
    "ConditionRow",
    "DominanceReport",
    "check_dominance",
    "check_dominance_unit",
    "oracle_equivalence",
    "OracleReport",
    "default_t_grid",
]

DOMINATES = "dominates"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ConditionRow:
    family: str  # "i", "ii", "iii"
    label: str  # basis index or t value
    v1: float
    v2: float
    gap: float
    satisfied: bool


@dataclass(frozen=True)
class DominanceReport:
    verdict: str
    cond_i: tuple
    cond_ii: tuple
    cond_iii: tuple
    witness: Optional[FunctionRep]
    witness_desc: str
    t_grid: tuple
    certification: str  # "grid" or "exact-atoms"
    s: float
    z: float
    tol_eq: float
    branch: str = ""  # admissibility branch label, e.g. the exceptional case

    @property
    def dominates(self) -> bool:
        return self.verdict == DOMINATES

    def rows(self):
        return list(self.cond_i) + list(self.cond_ii) + list(self.cond_iii)


def _tol_eq(value: float, base: float = 1e-9) -> float:
    return base * (1.0 + abs(value))


def _pooled_median(nu1: MeasureRep, nu2: MeasureRep, iv) -> float:
    pts = [x for x, m in nu1.atoms + nu2.atoms if m > 0]
    if pts:
        return _interior_point(iv, float(np.median(pts)))
    if iv.contains_interior(0.0):
        return 0.0
    lo = iv.a if math.isfinite(iv.a) else iv.b - 2.0
    hi = iv.b if math.isfinite(iv.b) else iv.a + 2.0
    return 0.5 * (lo + hi)


def _interior_point(iv, prefer: float) -> float:
    """prefer, nudged strictly inside the interval if it sits on an edge."""
    if iv.contains_interior(prefer):
        return prefer
    lo = iv.a if math.isfinite(iv.a) else min(prefer, iv.b) - 2.0
    hi = iv.b if math.isfinite(iv.b) else max(prefer, iv.a) + 2.0
    shift = 0.25 * (hi - lo)
    if prefer <= iv.a:
        return lo + min(shift, 1.0) if math.isfinite(lo) else prefer + 1.0
    return hi - min(shift, 1.0) if math.isfinite(hi) else prefer - 1.0


def default_t_grid(
    nu1: MeasureRep, nu2: MeasureRep, iv, n_fill: int = 64
) -> list:
    """Atoms of both measures, continuous-part quantile proxies, and an
    arctan-uniform fill, clipped to the interval."""
    pts = set()
    for nu in (nu1, nu2):
        for x, m in nu.atoms:
            if m > 0:
                pts.add(float(x))
        c = nu.continuous
        if c is not None:
            center = getattr(c, "mean", getattr(c, "shift", 0.0))
            spread = getattr(c, "sd", None)
            if spread is None:
                lam = getattr(c, "lam", None)
                scale = getattr(c, "scale", 1.0)
                spread = (
                    abs(scale) * (math.sqrt(lam) + 1.0) if lam is not None else 2.0
                )
                if lam is not None:
                    center = getattr(c, "shift", 0.0) + scale * lam
            for q in np.linspace(-4.0, 4.0, 17):
                pts.add(float(center + q * spread))
    lo = iv.a if math.isfinite(iv.a) else -1e3
    hi = iv.b if math.isfinite(iv.b) else 1e3
    base = [x for x in pts if iv.contains(x)]
    span_lo = min(base, default=0.0) - 1.0
    span_hi = max(base, default=0.0) + 1.0
    ta, tb = math.atan(max(lo, span_lo - 8.0)), math.atan(min(hi, span_hi + 8.0))
    for u in np.linspace(ta, tb, n_fill):
        x = math.tan(u)
        if iv.contains(x):
            pts.add(float(x))
    return sorted(pts)


# ---------------------------------------------------------------------------
# Condition evaluation
# ---------------------------------------------------------------------------

def _ordered_row(family: str, label: str, v1: float, v2: float, tol: float):
    if math.isnan(v1) or math.isnan(v2):
        raise UndefinedMomentError(f"condition ({family}) produced NaN")
    if v1 == math.inf:
        return ConditionRow(family, label, v1, v2, math.inf, True)
    if v2 == math.inf:
        return ConditionRow(family, label, v1, v2, -math.inf, False)
    gap = v1 - v2
    return ConditionRow(family, label, v1, v2, gap, gap >= -_tol_eq(v1, tol))


def _equal_row(family: str, label: str, v1: float, v2: float, tol: float):
    if not (math.isfinite(v1) and math.isfinite(v2)):
        return ConditionRow(family, label, v1, v2, math.nan, False)
    gap = v1 - v2
    return ConditionRow(family, label, v1, v2, gap, abs(gap) <= _tol_eq(v1, tol))


def check_dominance(
    nu1: MeasureRep,
    nu2: MeasureRep,
    cone: ConeSpec,
    s: Optional[float] = None,
    z: Optional[float] = None,
    t_grid: Optional[Sequence[float]] = None,
    tol_eq: float = 1e-9,
    quad: QuadConfig = DEFAULT_QUAD,
    check_admissibility: bool = True,
    allow_infinite_mass: bool = False,
) -> DominanceReport:
    """Decide (nu1, nu2) membership in the dual cone, general gauges.

    The default profile accepts finite-mass measures only; pass
    allow_infinite_mass=True to lift that (the conditions themselves admit
    infinite measures in the extended sense).
    """
    g, k, n = cone.gauges, cone.k, cone.n
    iv = g.interval
    _mass_gate(nu1, nu2, allow_infinite_mass)
    branch = ""
    if check_admissibility:
        for tag, nu in (("nu1", nu1), ("nu2", nu2)):
            rep = admissibility(nu, cone)
            if not rep.usable:
                raise PreconditionError(
                    f"{tag} is inadmissible ({rep.case}; witness {rep.witness})"
                )
            if rep.case == "exceptional":
                branch = (
                    "exceptional (k = n+1 odd, a not in I): conditions apply "
                    "to the bounded-below test class"
                    if not rep.admissible
                    else "exceptional (support bounded away from a)"
                )
    if s is None:
        s = _pooled_median(nu1, nu2, iv)
    if z is None:
        z = s if iv.contains_interior(s) else _pooled_median(nu1, nu2, iv)
    if t_grid is None:
        t_grid = default_t_grid(nu1, nu2, iv)
    t_grid = sorted(float(t) for t in t_grid)

    fs = finiteness_set(g, n, quad)
    witness = None
    witness_desc = ""

    cond_i = []
    for i in range(k):
        h = chain_t_handle(g, s, 0, i, quad=quad)
        try:
            v1, v2 = gmoment(nu1, h), gmoment(nu2, h)
        except UndefinedMomentError:
            return _inconclusive(k, s, z, t_grid, tol_eq)
        row = _equal_row("i", f"p_(s;0,{i})", v1, v2, tol_eq)
        cond_i.append(row)
        if not row.satisfied and witness is None:
            sign = -1.0 if (math.isfinite(row.gap) and row.gap > 0) else 1.0
            witness = _scaled_fn(h, sign)
            witness_desc = f"{'-' if sign < 0 else ''}p_(s;0,{i})"

    cond_ii = []
    for j in fs.F_kn(k):
        h = chain_az_handle(g, z, 0, k, j, quad=quad)
        try:
            v1, v2 = gmoment(nu1, h), gmoment(nu2, h)
        except UndefinedMomentError:
            return _inconclusive(k, s, z, t_grid, tol_eq)
        row = _ordered_row("ii", f"p_(a,z;0:{k}:{j})", v1, v2, tol_eq)
        cond_ii.append(row)
        if not row.satisfied and witness is None:
            witness = fn_from_wpoly(h)
            witness_desc = f"p_(a,z;0:{k}:{j})"

    cond_iii = []
    fam = chain_t_two_arg(g, 0, n, quad)
    pure_atoms = nu1.is_pure_atoms and nu2.is_pure_atoms
    for t in t_grid:
        if pure_atoms:
            v1 = _atom_pm(nu1, fam, t)
            v2 = _atom_pm(nu2, fam, t)
        else:
            h = chain_t_handle(g, t, 0, n, part=POSITIVE, quad=quad)
            try:
                v1, v2 = gmoment(nu1, h), gmoment(nu2, h)
            except UndefinedMomentError:
                return _inconclusive(k, s, z, t_grid, tol_eq)
        row = _ordered_row("iii", f"t={t:.17g}", v1, v2, tol_eq)
        cond_iii.append(row)
        if not row.satisfied and witness is None:
            witness = fn_from_wpoly(chain_t_handle(g, t, 0, n, part=POSITIVE, quad=quad))
            witness_desc = f"p+_(t;0,{n}) at t={t:.6g}"

    certification = "grid"
    if pure_atoms and isinstance(g, UnitGauge):
        extra = _exact_atom_refinement(nu1, nu2, n, iv, tol_eq)
        if extra is not None:
            t_bad, v1, v2 = extra
            row = _ordered_row("iii", f"t={t_bad:.17g} (piece min)", v1, v2, tol_eq)
            cond_iii.append(row)
            if not row.satisfied and witness is None:
                witness = fn_from_wpoly(
                    chain_t_handle(g, t_bad, 0, n, part=POSITIVE, quad=quad)
                )
                witness_desc = f"p+_(t;0,{n}) at t={t_bad:.6g}"
        certification = "exact-atoms"

    all_rows = cond_i + cond_ii + cond_iii
    verdict = DOMINATES if all(r.satisfied for r in all_rows) else FAILS
    return DominanceReport(
        verdict=verdict,
        cond_i=tuple(cond_i),
        cond_ii=tuple(cond_ii),
        cond_iii=tuple(cond_iii),
        witness=witness if verdict == FAILS else None,
        witness_desc=witness_desc if verdict == FAILS else "",
        t_grid=tuple(t_grid),
        certification=certification,
        s=float(s),
        z=float(z),
        tol_eq=tol_eq,
        branch=branch,
    )


def _mass_gate(nu1: MeasureRep, nu2: MeasureRep, allow: bool) -> None:
    if allow:
        return
    for tag, nu in (("nu1", nu1), ("nu2", nu2)):
        if not math.isfinite(nu.total_mass()):
            raise PreconditionError(
                f"{tag} has infinite total mass; pass allow_infinite_mass=True "
                "to run the extended-sense conditions anyway"
            )


def _scaled_fn(h: WPolyHandle, sign: float) -> FunctionRep:
    base = fn_from_wpoly(h)
    return FunctionRep(
        interval=base.interval,
        func=lambda x: sign * base.func(x),
        gauged_data=lambda s_, x: sign * base.gauged_data(s_, x),
        name=f"{sign:+g}*{base.name}",
    )


def _atom_pm(nu: MeasureRep, fam, t: float) -> float:
    acc = 0.0
    for x, m in nu.atoms:
        if m > 0 and x >= t:
            v = fam(t, x)
            acc += m * v if math.isfinite(v) else math.inf
    return acc


def _inconclusive(k, s, z, t_grid, tol_eq) -> DominanceReport:
    return DominanceReport(
        verdict=INCONCLUSIVE,
        cond_i=(),
        cond_ii=(),
        cond_iii=(),
        witness=None,
        witness_desc="undefined moment encountered",
        t_grid=tuple(t_grid),
        certification="grid",
        s=float(s),
        z=float(z),
        tol_eq=tol_eq,
    )


def _exact_atom_refinement(nu1, nu2, n, iv, tol_eq):
    """Exact minimization of the piecewise-polynomial margin in t.

    For pure-atom measures under unit gauges the (iii) margin restricted to
    t between consecutive atoms is a degree-n polynomial; minimize each
    piece (and the unbounded end pieces) exactly.  Returns the worst
    (t, v1, v2) or None when no interior dip below the knot values exists.
    """
    knots = sorted({x for x, m in (nu1.atoms + nu2.atoms) if m > 0})
    if not knots:
        return None
    lo_edge = iv.a if math.isfinite(iv.a) else knots[0] - 1e3
    hi_edge = iv.b if math.isfinite(iv.b) else knots[-1]
    edges = [lo_edge] + knots + [hi_edge]
    worst = None
    for a, b in zip(edges[:-1], edges[1:]):
        if not a < b:
            continue
        # margin(t) = sum_{atoms x >= b-} m (x - t)^n difference; on (a, b)
        # the active set is {x >= b} plus possibly x == b itself.
        coeffs = np.zeros(n + 1)
        for x, m, sgn in [(x, m, +1) for x, m in nu1.atoms] + [
            (x, m, -1) for x, m in nu2.atoms
        ]:
            if m == 0 or x < b:
                continue
            if n == 0:
                coeffs[0] += sgn * m
                continue
            # (x - t)^n as a polynomial in t.
            for r in range(n + 1):
                coeffs[r] += sgn * m * math.comb(n, r) * x ** (n - r) * (-1.0) ** r
        poly = np.polynomial.Polynomial(coeffs)
        unbounded_left = a == edges[0] and not math.isfinite(iv.a)
        cands = [0.5 * (a + b), b]
        if math.isfinite(a):
            cands.append(a)
        if n >= 2:
            roots = poly.deriv().roots()
            for r in roots:
                if abs(r.imag) < 1e-9 and r.real < b and (unbounded_left or r.real > a):
                    cands.append(float(r.real))
        if unbounded_left:
            cands.extend(_left_tail_candidates(nu1, nu2, n, knots[0]))
        for t in cands:
            v = float(poly(t))
            if worst is None or v < worst[0]:
                v1 = math.fsum(
                    m * (x - t) ** n if n else m
                    for x, m in nu1.atoms
                    if m > 0 and x >= t
                )
                v2 = math.fsum(
                    m * (x - t) ** n if n else m
                    for x, m in nu2.atoms
                    if m > 0 and x >= t
                )
                worst = (v, t, v1, v2)
    if worst is None:
        return None
    return worst[1], worst[2], worst[3]


def _left_tail_candidates(nu1, nu2, n, first_knot: float) -> list:
    """Candidate t values capturing the t -> -inf behavior of the margin.

    Left of every atom the margin expands in raw-moment differences D_i
    with weights (-t)^(n-i); the lowest non-vanishing D_i rules the tail.
    When that coefficient is negative the margin eventually dips: return
    deep candidates so the piece minimization catches it.
    """
    scale = 1.0 + sum(m * (1.0 + abs(x)) ** n for x, m in nu1.atoms + nu2.atoms)
    D = []
    for i in range(n + 1):
        d = math.fsum(m * x**i for x, m in nu1.atoms) - math.fsum(
            m * x**i for x, m in nu2.atoms
        )
        D.append(d)
    for i, d in enumerate(D):
        if abs(d) > 1e-12 * scale:
            if d < 0:
                return [first_knot - 4.0**j for j in range(1, 12)]
            return []
    return []


# ---------------------------------------------------------------------------
# Unit-gauge specialization (power moments / partial moments)
# ---------------------------------------------------------------------------

def check_dominance_unit(
    nu1: MeasureRep,
    nu2: MeasureRep,
    k: int,
    n: int,
    s: float = 0.0,
    z: float = 0.0,
    t_grid: Optional[Sequence[float]] = None,
    tol_eq: float = 1e-9,
    interval=None,
    drop_top_about_a: bool = False,
    check_admissibility: bool = True,
    allow_infinite_mass: bool = False,
) -> DominanceReport:
    """Unit-gauge dominance via power and partial moments.

    With a = -inf: (i) centered moments about s agree for i < k, (ii) the
    k-th moment about z is ordered when k <= n, (iii) upper partial moments
    of order n are ordered on the grid.  With a > -inf, (ii) is replaced by
    moments about a for j in [k, n]; the j = n member is implied by (iii)
    and may be dropped.
    """
    from .intervals import Interval

    iv = interval if interval is not None else Interval(-math.inf, math.inf)
    g = UnitGauge(iv)
    cone = ConeSpec(g, k, n)
    _mass_gate(nu1, nu2, allow_infinite_mass)
    branch = ""
    if check_admissibility:
        for tag, nu in (("nu1", nu1), ("nu2", nu2)):
            rep = admissibility(nu, cone)
            if not rep.usable:
                raise PreconditionError(
                    f"{tag} is inadmissible ({rep.case}; witness {rep.witness})"
                )
            if rep.case == "exceptional" and not rep.admissible:
                branch = (
                    "exceptional (k = n+1 odd, a not in I): conditions apply "
                    "to the bounded-below test class"
                )
    if t_grid is None:
        t_grid = default_t_grid(nu1, nu2, iv)
    t_grid = sorted(float(t) for t in t_grid)

    cond_i = []
    witness = None
    witness_desc = ""
    for i in range(k):
        try:
            v1 = central_moment_about(nu1, s, i)
            v2 = central_moment_about(nu2, s, i)
        except UndefinedMomentError:
            return _inconclusive(k, s, z, t_grid, tol_eq)
        row = _equal_row("i", f"(x-s)^{i}", v1, v2, tol_eq)
        cond_i.append(row)
        if not row.satisfied and witness is None:
            sign = -1.0 if (math.isfinite(row.gap) and row.gap > 0) else 1.0
            h = chain_t_handle(g, s, 0, i)
            witness = _scaled_fn(h, sign)
            witness_desc = f"{'-' if sign < 0 else ''}(x-s)^{i}"

    cond_ii = []
    if math.isinf(iv.a):
        if k <= n:
            v1 = central_moment_about(nu1, z, k)
            v2 = central_moment_about(nu2, z, k)
            row = _ordered_row("ii", f"(x-z)^{k}", v1, v2, tol_eq)
            cond_ii.append(row)
            if not row.satisfied and witness is None:
                witness = fn_from_wpoly(chain_t_handle(g, z, 0, k))
                witness_desc = f"(x-z)^{k}"
    else:
        top = n - 1 if drop_top_about_a else n
        for j in range(k, top + 1):
            v1 = central_moment_about(nu1, iv.a, j)
            v2 = central_moment_about(nu2, iv.a, j)
            row = _ordered_row("ii", f"(x-a)^{j}", v1, v2, tol_eq)
            cond_ii.append(row)
            if not row.satisfied and witness is None:
                witness = fn_from_wpoly(chain_t_handle(g, iv.a, 0, j))
                witness_desc = f"(x-a)^{j}"

    cond_iii = []
    scale_n = math.factorial(n)
    for t in t_grid:
        v1 = partial_moment(nu1, t, n)
        v2 = partial_moment(nu2, t, n)
        row = _ordered_row("iii", f"t={t:.17g}", v1, v2, tol_eq)
        cond_iii.append(row)
        if not row.satisfied and witness is None:
            witness = fn_from_wpoly(chain_t_handle(g, t, 0, n, part=POSITIVE))
            witness_desc = f"(x-t)_+^{n}/{scale_n} at t={t:.6g}"

    certification = "grid"
    pure_atoms = nu1.is_pure_atoms and nu2.is_pure_atoms
    if pure_atoms:
        extra = _exact_atom_refinement(nu1, nu2, n, iv, tol_eq)
        if extra is not None:
            t_bad, v1, v2 = extra
            row = _ordered_row("iii", f"t={t_bad:.17g} (piece min)", v1, v2, tol_eq)
            cond_iii.append(row)
            if not row.satisfied and witness is None:
                witness = fn_from_wpoly(
                    chain_t_handle(g, t_bad, 0, n, part=POSITIVE)
                )
                witness_desc = f"(x-t)_+^{n} at t={t_bad:.6g}"
        certification = "exact-atoms"

    all_rows = cond_i + cond_ii + cond_iii
    verdict = DOMINATES if all(r.satisfied for r in all_rows) else FAILS
    return DominanceReport(
        verdict=verdict,
        cond_i=tuple(cond_i),
        cond_ii=tuple(cond_ii),
        cond_iii=tuple(cond_iii),
        witness=witness if verdict == FAILS else None,
        witness_desc=witness_desc if verdict == FAILS else "",
        t_grid=tuple(t_grid),
        certification=certification,
        s=float(s),
        z=float(z),
        tol_eq=tol_eq,
        branch=branch,
    )


# ---------------------------------------------------------------------------
# Sampled-cone oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleReport:
    verdict: str
    trials: int
    soundness_violations: tuple
    worst_margin: float
    witness_gap: Optional[float]

    @property
    def clean(self) -> bool:
        return not self.soundness_violations


def oracle_equivalence(
    nu1: MeasureRep,
    nu2: MeasureRep,
    cone: ConeSpec,
    trials: int = 200,
    seed: int = 0,
    s: Optional[float] = None,
    z: Optional[float] = None,
    tol: float = 1e-7,
    tol_eq: float = 1e-11,
    quad: QuadConfig = DEFAULT_QUAD,
) -> OracleReport:
    """Cross-check the dominance verdict against sampled cone members.

    Samples random nonnegative combinations of the generating elements
    (signed degree < k basis, nonnegative second-chain terms, nonnegative
    positive parts at random anchors) and verifies that a "dominates"
    verdict implies nu1(f) >= nu2(f) for every sample, and that a "fails"
    verdict carries a strictly violating witness.  Finite-atom measures
    only: sample integrals are exact sums.
    """
    if not (nu1.is_pure_atoms and nu2.is_pure_atoms):
        raise PreconditionError("the sampled-cone oracle needs finite-atom measures")
    g, k, n = cone.gauges, cone.k, cone.n
    iv = g.interval
    if s is None:
        s = _pooled_median(nu1, nu2, iv)
    if z is None:
        z = s
    report = check_dominance(
        nu1, nu2, cone, s=s, z=z, tol_eq=tol_eq, quad=quad
    )
    rng = np.random.default_rng(seed)
    fs = finiteness_set(g, n, quad)
    basis_low = [chain_t_handle(g, s, 0, i, quad=quad) for i in range(k)]
    basis_az = [chain_az_handle(g, z, 0, k, j, quad=quad) for j in fs.F_kn(k)]
    fam = chain_t_two_arg(g, 0, n, quad)
    atoms1 = [(x, m) for x, m in nu1.atoms if m > 0]
    atoms2 = [(x, m) for x, m in nu2.atoms if m > 0]
    locs = [x for x, _ in atoms1 + atoms2]
    lo = min(locs) - 2.0
    hi = max(locs) + 2.0

    violations = []
    worst = math.inf
    for trial in range(trials):
        a_signed = rng.normal(size=k)
        b_pos = rng.exponential(size=len(basis_az))
        n_parts = int(rng.integers(1, 6))
        ts = rng.uniform(lo, hi, size=n_parts)
        c_pos = rng.exponential(size=n_parts)

        def f_at(x: float) -> float:
            acc = 0.0
            for coef, h in zip(a_signed, basis_low):
                acc += coef * h.eval(x)
            for coef, h in zip(b_pos, basis_az):
                acc += coef * h.eval(x)
            for coef, t in zip(c_pos, ts):
                if x >= t:
                    acc += coef * fam(t, x)
            return acc

        m1 = math.fsum(m * f_at(x) for x, m in atoms1)
        m2 = math.fsum(m * f_at(x) for x, m in atoms2)
        margin = m1 - m2
        worst = min(worst, margin)
        if report.dominates and margin < -tol * (1.0 + abs(m1) + abs(m2)):
            violations.append((trial, margin))

    witness_gap = None
    if report.verdict == FAILS:
        w = report.witness
        w1 = math.fsum(m * w.func(x) for x, m in atoms1)
        w2 = math.fsum(m * w.func(x) for x, m in atoms2)
        witness_gap = w2 - w1
        if not witness_gap > tol:
            violations.append(("witness-not-strict", witness_gap))
    return OracleReport(
        verdict=report.verdict,
        trials=trials,
        soundness_violations=tuple(violations),
        worst_margin=worst,
        witness_gap=witness_gap,
    )
