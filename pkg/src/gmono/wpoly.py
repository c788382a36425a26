"""Generalized polynomial chains over a gauge sequence.

Two recursively defined families are provided.

* ``p_{t;j,m}``  -- anchored at a point t in [a, b): level m is w_m, and
  each step down integrates from t and multiplies by the current gauge.
  For t = a not in I the recursive integral may diverge; divergence is a
  value (inf), decided analytically where possible and by a doubling-window
  probe otherwise.

* ``p_{a,z;i:k:j}`` -- starts from the left-anchored ``p_{a;k,j}`` (which
  must be finite) and continues the same descent, but integrating from an
  interior point z.

Positive parts multiply by the indicator {x >= t} with the convention
inf * 0 = 0.  Degree-k interpolation at a point is realized through the
basis property of the first chain.

Evaluation engines: exact term arithmetic for unit/exponential gauges
(polynomial-times-exponential ring) and for power gauges (real-power ring),
a single-level antiderivative shortcut for table gauges that provide one,
and an adaptive Chebyshev pseudo-spectral integrator as the generic route.
The generic route is deliberately independent of the closed forms so the
two can be cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DomainError,
    GaugeError,
    InconclusiveError,
    PreconditionError,
    QuadratureError,
)
from .intervals import (
    ExponentialGauge,
    GaugeSpec,
    Interval,
    PowerGauge,
    UnitGauge,
)

__all__ = [
    "FULL",
    "POSITIVE",
    "NEGATIVE",
    "QuadConfig",
    "DEFAULT_QUAD",
    "WPolyHandle",
    "FinitenessSet",
    "wpoly_eval",
    "wpoly_eval_az",
    "finiteness_set",
    "interpolate",
    "chain_t_handle",
    "chain_az_handle",
]

FULL = "full"
POSITIVE = "positive"
NEGATIVE = "negative"

_TINY_RATE = 1e-12


@dataclass(frozen=True)
class QuadConfig:
    """Tolerances for the numeric evaluation routes."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_cheb_nodes: int = 2048
    probe_windows: int = 24

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise DomainError("tolerances must be positive")


DEFAULT_QUAD = QuadConfig()


def _safe_exp(u: float) -> float:
    if u > 700.0:
        return math.inf
    if u < -745.0:
        return 0.0
    return math.exp(u)


# ---------------------------------------------------------------------------
# Exact term rings
# ---------------------------------------------------------------------------

class ExpPoly:
    """Finite sum of terms c * x^d * exp(r*x), d a nonnegative integer.

    Closed under multiplication by exponentials and under integration from
    a finite point, which is exactly what the chain recursion needs for
    unit/exponential gauges.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[dict] = None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def exponential(cls, rate: float) -> "ExpPoly":
        return cls({(0, _canon_rate(rate)): 1.0})

    def _add_term(self, d: int, r: float, c: float) -> None:
        if c == 0.0:
            return
        key = (d, _canon_rate(r))
        self.terms[key] = self.terms.get(key, 0.0) + c

    def mul_exp(self, rate: float) -> "ExpPoly":
        out = ExpPoly()
        for (d, r), c in self.terms.items():
            out._add_term(d, r + rate, c)
        return out

    def scaled(self, s: float) -> "ExpPoly":
        out = ExpPoly()
        for (d, r), c in self.terms.items():
            out._add_term(d, r, c * s)
        return out

    def plus(self, other: "ExpPoly") -> "ExpPoly":
        out = ExpPoly(dict(self.terms))
        for (d, r), c in other.terms.items():
            out._add_term(d, r, c)
        return out

    def antiderivative(self) -> "ExpPoly":
        out = ExpPoly()
        for (d, r), c in self.terms.items():
            if r == 0.0:
                out._add_term(d + 1, 0.0, c / (d + 1))
            else:
                sign = 1.0
                fact = 1.0
                for i in range(d + 1):
                    out._add_term(d - i, r, c * sign * fact / r ** (i + 1))
                    sign = -sign
                    fact *= d - i
        return out

    def integrate_from(self, t: float) -> "ExpPoly":
        anti = self.antiderivative()
        out = ExpPoly(dict(anti.terms))
        out._add_term(0, 0.0, -anti.eval(t))
        return out

    def integrate_from_neginf(self) -> Optional["ExpPoly"]:
        """None when any term fails integrable decay at -inf."""
        for (d, r), c in self.terms.items():
            if c != 0.0 and r <= _TINY_RATE:
                return None
        return self.antiderivative()

    def eval(self, x: float) -> float:
        acc = 0.0
        dominant = None  # overflowed term with the largest r*x (then degree)
        for (d, r), c in self.terms.items():
            if c == 0.0:
                continue
            e = _safe_exp(r * x) if r != 0.0 else 1.0
            if e == math.inf:
                key = (r * x, d)
                if dominant is None or key > dominant[0]:
                    dominant = (key, c)
                continue
            acc += c * x**d * e
        if dominant is not None:
            return math.inf if dominant[1] > 0 else -math.inf
        return acc

    def pretty(self, var: str = "x") -> str:
        bits = []
        for (d, r), c in sorted(self.terms.items(), key=lambda kv: kv[0]):
            if c == 0.0:
                continue
            factors = []
            if d:
                factors.append(f"{var}^{d}" if d > 1 else var)
            if r:
                factors.append(f"exp({_fmt(r)}{var})")
            if not factors:
                bits.append(_fmt(c))
            elif c == 1.0:
                bits.append("*".join(factors))
            else:
                bits.append(f"{_fmt(c)}*" + "*".join(factors))
        return " + ".join(bits) if bits else "0"


def _canon_rate(r: float) -> float:
    return 0.0 if abs(r) <= _TINY_RATE else r


def _fmt(v: float) -> str:
    if v == int(v) and abs(v) < 1e12:
        return str(int(v))
    return repr(v)


class PowPoly:
    """Finite sum of terms c * u^p with u = x - base and real exponents p."""

    __slots__ = ("base", "terms")

    def __init__(self, base: float, terms: Optional[dict] = None):
        self.base = base
        self.terms = terms if terms is not None else {}

    def _add_term(self, p: float, c: float) -> None:
        if c == 0.0:
            return
        self.terms[p] = self.terms.get(p, 0.0) + c

    def mul_power(self, p: float) -> "PowPoly":
        out = PowPoly(self.base)
        for q, c in self.terms.items():
            out._add_term(q + p, c)
        return out

    def antiderivative(self) -> "PowPoly":
        out = PowPoly(self.base)
        for p, c in self.terms.items():
            if abs(p + 1.0) <= 1e-12:
                raise QuadratureError(
                    "power-gauge chain produced a logarithmic term; "
                    "numeric route required"
                )
            out._add_term(p + 1.0, c / (p + 1.0))
        return out

    def integrate_from(self, t: float) -> "PowPoly":
        anti = self.antiderivative()
        out = PowPoly(self.base, dict(anti.terms))
        out._add_term(0.0, -anti.eval(t))
        return out

    def integrate_from_base(self) -> Optional["PowPoly"]:
        """Integral from u = 0; None when a term is not integrable there."""
        for p, c in self.terms.items():
            if c != 0.0 and p <= -1.0 + 1e-12:
                return None
        return self.antiderivative()

    def eval(self, x: float) -> float:
        u = x - self.base
        acc = 0.0
        for p, c in self.terms.items():
            if u == 0.0:
                if p > 0:
                    continue
                if p == 0:
                    acc += c
                    continue
                return math.inf if c > 0 else -math.inf
            acc += c * u**p
        return acc


# ---------------------------------------------------------------------------
# Adaptive Chebyshev chain integrator (generic route)
# ---------------------------------------------------------------------------

def _cheb_nodes(n: int) -> np.ndarray:
    # Chebyshev points of the second kind on [-1, 1], ascending.
    return -np.cos(np.pi * np.arange(n + 1) / n)


def _cheb_coeffs(vals: np.ndarray) -> np.ndarray:
    """Interpolation coefficients from values at _cheb_nodes(len(vals)-1)."""
    n = len(vals) - 1
    v = vals[::-1]  # descending nodes = cos(pi*k/n)
    ext = np.concatenate([v, v[-2:0:-1]])
    c = np.fft.rfft(ext).real / n
    c[0] /= 2.0
    c[n] /= 2.0
    return c[: n + 1]


class PanelChain:
    """Composite Clenshaw-Curtis chain for left-anchored, positive chains.

    Integrands in a left-anchored chain are positive, so cumulative panel
    sums carry no cancellation and the evaluation stays relatively accurate
    even where the chain values are many orders of magnitude below their
    maximum.  That property is what the divergence probe needs on deep
    doubling windows; a single global Chebyshev fit loses it because gauge
    factors amplify the fit's absolute error near the anchor.
    """

    def __init__(
        self,
        gauges: GaugeSpec,
        levels: Sequence[int],
        breaks: np.ndarray,
        start_values: Callable[[np.ndarray], np.ndarray],
        quad: QuadConfig = DEFAULT_QUAD,
        defer_final: bool = False,
    ):
        if len(breaks) < 2:
            raise DomainError("need at least one panel")
        self.gauges = gauges
        self.levels = list(levels)
        self.breaks = np.asarray(breaks, dtype=float)
        self.lo = float(self.breaks[0])
        self.hi = float(self.breaks[-1])
        self.start_values = start_values
        self.quad = quad
        # With defer_final the last gauge factor is applied at query time
        # only; the stored panels hold the final integral, which stays in
        # float range even when the outermost gauge overflows deep inside
        # the working interval.
        self.final_gauge = self.levels[-1] if defer_final and self.levels else None
        self._coeffs = self._build()

    def _run(self, breaks: np.ndarray, order: int):
        unit = _cheb_nodes(order)
        xs = np.stack(
            [
                breaks[p] + (unit + 1.0) * (breaks[p + 1] - breaks[p]) / 2.0
                for p in range(len(breaks) - 1)
            ]
        )
        panels = xs.shape[0]
        flat = xs.ravel()
        vals = np.asarray(self.start_values(flat), dtype=float).reshape(xs.shape)
        for lvl in self.levels:
            cum = np.empty_like(vals)
            offset = 0.0
            for p in range(panels):
                c = _cheb_coeffs(vals[p])
                half = (breaks[p + 1] - breaks[p]) / 2.0
                ic = np.polynomial.chebyshev.chebint(c) * half
                base = np.polynomial.chebyshev.chebval(-1.0, ic)
                cum[p] = offset + (np.polynomial.chebyshev.chebval(unit, ic) - base)
                offset += np.polynomial.chebyshev.chebval(1.0, ic) - base
            if lvl == self.final_gauge:
                vals = cum  # gauge factor deferred to eval()
            else:
                w = self.gauges.values(lvl, flat).reshape(xs.shape)
                if np.any((w == 0.0) & (np.abs(cum) > 1e250)):
                    raise QuadratureError(
                        "gauge underflow against a huge integral: float "
                        "range breakdown"
                    )
                vals = w * cum
        return [_cheb_coeffs(vals[p]) for p in range(panels)]

    def _build(self):
        # Bisect panels that fail their own two-resolution agreement test;
        # steep gauge factors (large within-panel dynamic range) force
        # narrow panels locally, which a higher order alone cannot fix.
        breaks = self.breaks
        probes = np.linspace(-1.0, 1.0, 9)
        for _ in range(9):
            lowres = self._run(breaks, 32)
            hires = self._run(breaks, 48)
            bad = []
            for p in range(len(breaks) - 1):
                pv = np.polynomial.chebyshev.chebval(probes, lowres[p])
                cv = np.polynomial.chebyshev.chebval(probes, hires[p])
                err = np.max(np.abs(pv - cv))
                if not err <= self.quad.abs_tol + self.quad.rel_tol * (
                    1e-30 + np.max(np.abs(cv))
                ):
                    bad.append(p)
            if not bad:
                self.breaks = breaks
                return hires
            if len(breaks) > 1024:
                break
            new = list(breaks)
            for p in reversed(bad):
                new.insert(p + 1, 0.5 * (breaks[p] + breaks[p + 1]))
            breaks = np.asarray(new)
        raise QuadratureError(
            f"panel chain did not converge with {len(breaks) - 1} panels on "
            f"[{self.lo}, {self.hi}]"
        )

    def eval(self, x: float) -> float:
        if not self.lo <= x <= self.hi:
            raise DomainError("query outside working interval")
        p = int(np.searchsorted(self.breaks, x, side="right") - 1)
        p = min(max(p, 0), len(self.breaks) - 2)
        a, b = self.breaks[p], self.breaks[p + 1]
        u = 2.0 * (x - a) / (b - a) - 1.0
        v = float(np.polynomial.chebyshev.chebval(u, self._coeffs[p]))
        if self.final_gauge is not None:
            v *= self.gauges.value(self.final_gauge, x)
        return v


def _panel_breaks(lo: float, hi: float, finite_left: Optional[float]) -> np.ndarray:
    """Panel edges on [lo, hi]; geometric refinement toward a finite
    singular left base, uniform width-<=2 panels otherwise."""
    if finite_left is not None and math.isfinite(finite_left):
        # Geometric toward finite_left (which sits at or below lo).
        d0 = lo - finite_left
        edges = [lo]
        d = d0
        while finite_left + d < hi:
            d *= 2.0
            edges.append(min(finite_left + d, hi))
        if edges[-1] < hi:
            edges.append(hi)
        return np.array(edges)
    n = max(4, int(math.ceil((hi - lo) / 2.0)))
    return np.linspace(lo, hi, n + 1)


# ---------------------------------------------------------------------------
# Per-triple chain evaluators
# ---------------------------------------------------------------------------

class _ChainT:
    """Evaluates p_{t;j,m} (full part) for one (t, j, m) triple."""

    def __init__(self, g: GaugeSpec, t: float, j: int, m: int, quad: QuadConfig):
        if j > m:
            raise DomainError("need j <= m")
        self.g = g
        self.t = t
        self.j = j
        self.m = m
        self.quad = quad
        self.divergent = False
        self._exact = None
        self._cheb = None
        self._left_depth: Optional[int] = None
        self._prepare()

    def _prepare(self) -> None:
        g, t, j, m = self.g, self.t, self.j, self.m
        if j == m:
            if isinstance(g, (UnitGauge, ExponentialGauge)):
                self._exact = ExpPoly.exponential(_lam_getter(g)(m))
            elif isinstance(g, PowerGauge):
                self._exact = PowPoly(g.base, {g.lam(m) - 1.0: 1.0})
            return
        if isinstance(g, (UnitGauge, ExponentialGauge)):
            lam = _lam_getter(g)
            if math.isinf(t):
                poly = _exp_chain_from_neginf(lam, j, m)
                if poly is None:
                    self.divergent = True
                else:
                    self._exact = poly
            else:
                self._exact = _exp_chain(lam, t, j, m)
            return
        if isinstance(g, PowerGauge):
            try:
                if t == g.base:
                    poly = _pow_chain_from_base(g, j, m)
                    if poly is None:
                        self.divergent = True
                    else:
                        self._exact = poly
                else:
                    self._exact = _pow_chain(g, t, j, m)
                return
            except QuadratureError:
                pass  # logarithmic term: fall back to the numeric route
        if m == j + 1:
            anti = g.antideriv(m)
            if anti is not None:
                lo_val = anti(t)
                if math.isfinite(lo_val):
                    self._exact = _OneLevel(g, j, anti, lo_val)
                else:
                    self.divergent = True  # W(t) = -inf: no integrable decay
                return
        if math.isinf(t) or (t == self.g.interval.a and not self.g.interval.left_closed):
            finite, depth = _probe_left_chain(g, j, m, self.quad)
            if not finite:
                self.divergent = True
            else:
                self._left_depth = depth
            return
        # Finite interior anchor: lazy Chebyshev chain, built on first eval.

    def _chain_for(self, x: float):
        g, t, j, m = self.g, self.t, self.j, self.m
        if self._left_depth is not None:
            # Left-anchored generic chain: positive integrands, panel route.
            if self._cheb is None or not (self._cheb.lo <= x <= self._cheb.hi):
                iv = g.interval
                x0 = _probe_point(iv)
                if math.isfinite(iv.a):
                    anchor = iv.a + (min(x, x0) - iv.a) / 2.0 ** (self._left_depth + 1)
                else:
                    anchor = min(
                        x0 - max(8.0, 2.0 * abs(x0)) * 2.0**self._left_depth,
                        x - 8.0,
                    )
                hi = max(x + 0.5, x0)
                if math.isfinite(iv.b):
                    hi = min(hi, iv.b)
                finite_a = iv.a if math.isfinite(iv.a) else None
                self._cheb = PanelChain(
                    g,
                    levels=range(m - 1, j - 1, -1),
                    breaks=_panel_breaks(anchor, hi, finite_a),
                    start_values=lambda xs: g.values(m, xs),
                    quad=self.quad,
                    defer_final=True,
                )
            return self._cheb
        if self._cheb is None or not (self._cheb.lo <= x <= self._cheb.hi):
            pad = 0.5 * (1.0 + abs(x - t))
            lo = min(t, x) - pad
            hi = max(t, x) + pad
            iv = g.interval
            if math.isfinite(iv.a):
                lo = max(lo, iv.a)
            if math.isfinite(iv.b):
                hi = min(hi, iv.b)
            if not lo < hi:
                raise DomainError("cannot build working interval")
            self._cheb = ChebChain(
                g,
                levels=range(m - 1, j - 1, -1),
                anchor=t,
                lo=lo,
                hi=hi,
                start_values=lambda xs: g.values(m, xs),
                quad=self.quad,
            )
        return self._cheb

    def eval(self, x: float) -> float:
        g, t, j, m = self.g, self.t, self.j, self.m
        if j == m:
            return self._exact.eval(x) if self._exact is not None else g.value(m, x)
        if self.divergent:
            return math.inf
        if x == t:
            return 0.0
        if self._exact is not None:
            return self._exact.eval(x)
        return self._chain_for(x).eval(x)


class _OneLevel:
    """p_{t;j,j+1}(x) = w_j(x) * (W(x) - W(t)) via a known antiderivative."""

    def __init__(self, g: GaugeSpec, j: int, anti, lo_val: float):
        self.g = g
        self.j = j
        self.anti = anti
        self.lo_val = lo_val

    def eval(self, x: float) -> float:
        return self.g.value(self.j, x) * (self.anti(x) - self.lo_val)


def _lam_getter(g: GaugeSpec) -> Callable[[int], float]:
    if isinstance(g, UnitGauge):
        return lambda j: 0.0
    return g.lam  # type: ignore[union-attr]


def _exp_chain(lam: Callable[[int], float], t: float, j: int, m: int) -> ExpPoly:
    p = ExpPoly.exponential(lam(m))
    for lvl in range(m - 1, j - 1, -1):
        p = p.integrate_from(t).mul_exp(lam(lvl))
    return p


def _exp_chain_from_neginf(lam, j: int, m: int) -> Optional[ExpPoly]:
    p = ExpPoly.exponential(lam(m))
    for lvl in range(m - 1, j - 1, -1):
        anti = p.integrate_from_neginf()
        if anti is None:
            return None
        p = anti.mul_exp(lam(lvl))
    return p


def _pow_chain(g: PowerGauge, t: float, j: int, m: int) -> PowPoly:
    p = PowPoly(g.base, {g.lam(m) - 1.0: 1.0})
    for lvl in range(m - 1, j - 1, -1):
        p = p.integrate_from(t).mul_power(g.lam(lvl) - 1.0)
    return p


def _pow_chain_from_base(g: PowerGauge, j: int, m: int) -> Optional[PowPoly]:
    p = PowPoly(g.base, {g.lam(m) - 1.0: 1.0})
    for lvl in range(m - 1, j - 1, -1):
        anti = p.integrate_from_base()
        if anti is None:
            return None
        p = anti.mul_power(g.lam(lvl) - 1.0)
    return p


# ---------------------------------------------------------------------------
# Divergence probe for a generic left-anchored chain
# ---------------------------------------------------------------------------

def _probe_point(iv: Interval) -> float:
    lo = iv.a if math.isfinite(iv.a) else -1.0
    hi = iv.b if math.isfinite(iv.b) else max(lo + 2.0, 1.0)
    return lo + 0.75 * (hi - lo)


def _strongly_decayed(incs, vals, quad: QuadConfig) -> bool:
    """Two-increment early acceptance: the latest window added next to
    nothing and shrank by 10x, so the remaining tail is negligible."""
    if len(incs) < 2:
        return False
    scale = abs(vals[-1]) + 1.0
    tol = quad.abs_tol + quad.rel_tol * scale
    return 0.0 <= incs[-1] <= tol and incs[-1] <= 0.1 * incs[-2]


def _probe_left_chain(g: GaugeSpec, j: int, m: int, quad: QuadConfig):
    """Decide the left-endpoint dichotomy by truncated-anchor probing.

    Truncations p_{L;j,m}(x0) increase as L marches toward a in doubling
    windows.  Geometric decay of the increments over three consecutive
    windows certifies a finite limit; non-decreasing increments certify
    divergence; anything else raises InconclusiveError rather than
    guessing.  Returns (finite, usable_anchor).
    """
    iv = g.interval
    a = iv.a
    x0 = _probe_point(iv)

    def anchor_at(i: int) -> float:
        if math.isinf(a):
            return x0 - max(8.0, 2.0 * abs(x0)) * 2.0**i
        return a + (x0 - a) / 2.0 ** (i + 1)

    def truncated_value(L: float) -> float:
        chain = PanelChain(
            g,
            levels=range(m - 1, j - 1, -1),
            breaks=_panel_breaks(L, x0, a if math.isfinite(a) else None),
            start_values=lambda xs: g.values(m, xs),
            quad=quad,
            defer_final=True,
        )
        return chain.eval(x0)

    vals = []
    incs = []
    decided_at = None
    for i in range(quad.probe_windows):
        try:
            v = truncated_value(anchor_at(i))
        except (OverflowError, ZeroDivisionError, GaugeError) as exc:
            # Float range breakdown inside this window; decide from the
            # evidence gathered so far, never by fiat.
            if decided_at is not None:
                return True, i - 1
            if len(incs) >= 2 and incs[-1] > 1.5 * incs[-2] > 0:
                return False, None
            if _strongly_decayed(incs, vals, quad):
                return True, i - 1
            raise InconclusiveError(
                f"divergence probe for p_(a;{j},{m}) hit float range limits "
                f"at anchor {anchor_at(i)} before the dichotomy was settled"
            ) from exc
        except QuadratureError as exc:
            raise InconclusiveError(
                f"divergence probe for p_(a;{j},{m}) could not resolve the "
                f"truncated chain at anchor {anchor_at(i)}: {exc}"
            ) from exc
        if not math.isfinite(v):
            return False, None  # truncations are monotone: the limit is inf
        vals.append(v)
        if i >= 1:
            incs.append(vals[-1] - vals[-2])
        if len(incs) >= 2 and incs[-1] > 100.0 * incs[-2] > 0:
            return False, None  # explosive growth of monotone truncations
        if _strongly_decayed(incs, vals, quad):
            return True, i
        if len(incs) >= 3:
            d1, d2, d3 = incs[-3], incs[-2], incs[-1]
            scale = abs(vals[-1]) + 1.0
            tol = quad.abs_tol + quad.rel_tol * scale
            if d3 <= tol:
                return True, i
            if d1 > 0 and d2 > 0 and d2 / d1 <= 0.75 and d3 / d2 <= 0.75:
                # Geometric decay: the limit exists.  March a little longer
                # for value accuracy while the panel budget allows.
                if decided_at is None:
                    decided_at = i
                q = max(d2 / d1, d3 / d2)
                budget = (x0 - anchor_at(i + 1)) / 2.0 > 900.0
                if (
                    d3 * q / (1.0 - q) <= 10.0 * tol
                    or i - decided_at >= 4
                    or budget
                ):
                    return True, i
            elif decided_at is None and d1 > 0 and d2 > 0:
                # Over doubling windows, divergence shows as increment
                # ratios at or above 1 with a flat-or-rising trend.  A
                # ratio that is large but steadily falling is the
                # transient of a slowly decaying integrand: march on.
                r12 = d2 / d1
                r23 = d3 / d2
                if r12 >= 0.999 and r23 >= 0.999 and r23 >= r12 * 0.999:
                    return False, None
    if decided_at is not None:
        return True, quad.probe_windows - 1
    raise InconclusiveError(
        f"divergence probe for p_(a;{j},{m}) did not settle after "
        f"{quad.probe_windows} doubling windows"
    )


# ---------------------------------------------------------------------------
# Finiteness sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FinitenessSet:
    """Finiteness pattern of the left-anchored chain up to level n.

    Columns F_(.m) are contiguous upper ranges [j_m, m]; rows F_(j.) need
    not be contiguous.
    """

    gauges: GaugeSpec
    n: int
    table: tuple  # table[j][m-j] for 0 <= j <= m <= n
    method: str

    def contains(self, j: int, m: int) -> bool:
        if not 0 <= j <= m <= self.n:
            raise DomainError(f"need 0 <= j <= m <= {self.n}")
        return self.table[j][m - j]

    def j_m(self, m: int) -> int:
        """Minimal j with (j, m) finite; columns are contiguous."""
        jm = m
        for j in range(m, -1, -1):
            if self.contains(j, m):
                jm = j
            else:
                break
        return jm

    def column(self, m: int) -> list:
        return [j for j in range(m + 1) if self.contains(j, m)]

    def row(self, j: int) -> list:
        return [m for m in range(j, self.n + 1) if self.contains(j, m)]

    def F_kn(self, k: int) -> list:
        """F_{k,n}: the levels m in [k, n] with p_{a;k,m} finite (row k)."""
        return [m for m in range(k, self.n + 1) if self.contains(k, m)]


def _exp_criterion(lam: Callable[[int], float], j: int, m: int) -> bool:
    # Every suffix sum lam_{i+1} + ... + lam_m, i in [j, m-1], must be > 0.
    for i in range(j, m):
        if math.fsum(lam(s) for s in range(i + 1, m + 1)) <= 0.0:
            return False
    return True


def finiteness_set(
    g: GaugeSpec, n: int, quad: QuadConfig = DEFAULT_QUAD, force_probe: bool = False
) -> FinitenessSet:
    """Finiteness pattern of p_{a;j,m} for 0 <= j <= m <= n.

    Analytic criteria cover the unit/exponential/power families (suffix
    sums of the exponent parameters); a belonging to I, or lying finite
    below every gauge singularity, makes everything finite; otherwise probe
    integration decides.  ``force_probe`` bypasses the analytic shortcuts
    so the two routes can be compared.
    """
    if n < 0:
        raise DomainError("n must be >= 0")
    iv = g.interval
    table = [[None] * (n + 1 - j) for j in range(n + 1)]

    def put(j, m, val):
        table[j][m - j] = val

    def fill(pred, method):
        for j in range(n + 1):
            for m in range(j, n + 1):
                put(j, m, pred(j, m))
        return FinitenessSet(g, n, _freeze(table), method)

    if not force_probe:
        if iv.left_closed:
            return fill(lambda j, m: True, "a in I")
        if isinstance(g, UnitGauge):
            if math.isinf(iv.a):
                return fill(lambda j, m: j == m, "analytic")
            return fill(lambda j, m: True, "analytic")
        if isinstance(g, ExponentialGauge):
            if math.isfinite(iv.a):
                return fill(lambda j, m: True, "analytic")
            return fill(lambda j, m: _exp_criterion(g.lam, j, m), "analytic")
        if isinstance(g, PowerGauge):
            if iv.a > g.base:
                return fill(lambda j, m: True, "analytic")
            return fill(lambda j, m: _exp_criterion(g.lam, j, m), "analytic")

    for m in range(n + 1):
        put(m, m, True)
        for j in range(m - 1, -1, -1):
            if table[j + 1][m - j - 1] is False:
                put(j, m, False)  # dichotomy propagates downward
                continue
            finite, _ = _probe_left_chain(g, j, m, quad)
            put(j, m, finite)
    return FinitenessSet(g, n, _freeze(table), "probe")


def _freeze(table) -> tuple:
    return tuple(tuple(bool(v) for v in row) for row in table)


# ---------------------------------------------------------------------------
# Handles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WPolyHandle:
    """An evaluable w-polynomial or a positive/negative part of one.

    ``family`` is a tagged tuple:
      ("chain_t", t, j, m)         p_{t;j,m}, an S^j w-polynomial;
      ("chain_az", z, i, k, j)     p_{a,z;i:k:j}, an S^i w-polynomial;
      ("interp", z, (c_0..c_k))    sum_l c_l p_{z;0,l}.

    Gauged derivatives are evaluated through the exact chain identities,
    never by differencing.  Evaluations are memoized per handle.
    """

    gauges: GaugeSpec
    family: tuple
    part: str = FULL
    quad: QuadConfig = DEFAULT_QUAD
    _state: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.part not in (FULL, POSITIVE, NEGATIVE):
            raise DomainError(f"bad part {self.part!r}")
        if self.part != FULL and self.family[0] != "chain_t":
            raise DomainError("positive/negative parts apply to the t-chain only")

    @property
    def tag(self) -> str:
        return self.family[0]

    @property
    def degree(self) -> int:
        if self.tag == "chain_t":
            return self.family[3] - self.family[2]
        if self.tag == "chain_az":
            _, _, i, _, j = self.family
            return j - i
        return len(self.family[2]) - 1

    # -- evaluation -----------------------------------------------------------
    def eval(self, x: float) -> float:
        """Value at x; +inf signals analytic divergence of the chain."""
        x = float(x)
        self.gauges.interval.require(x)
        cache = self._state.setdefault("cache", {})
        key = (x, self.part)
        hit = cache.get(key)
        if hit is not None:
            return hit
        val = self._eval_part(x)
        if len(cache) < 65536:
            cache[key] = val
        return val

    __call__ = eval

    def _eval_part(self, x: float) -> float:
        if self.part != FULL:
            t = self.family[1]
            if self.part == POSITIVE and not x >= t:
                return 0.0  # covers the inf * 0 = 0 convention
            if self.part == NEGATIVE and not x < t:
                return 0.0
        return self._full_evaluator().eval(x)

    def _full_evaluator(self):
        ev = self._state.get("ev")
        if ev is None:
            ev = _build_evaluator(self.gauges, self.family, self.quad)
            self._state["ev"] = ev
        return ev

    # -- exact gauged derivatives ----------------------------------------------
    def gauged_deriv(self, s: int, x: float) -> float:
        """s-th gauged derivative at x under the handle's own gauge level.

        A chain_t handle at level j differentiates under the j-shifted
        gauges; the s-th derivative is p_{t;j+s,m}/w_{j+s}, with positive
        parts carrying their indicator through each level unchanged.
        """
        if s < 0:
            raise DomainError("derivative order must be >= 0")
        if self.part == NEGATIVE and s > 0:
            raise PreconditionError("negative parts are not differentiable across t")
        g = self.gauges
        x = float(x)
        sub = self._deriv_handle(s)
        if sub is None:
            return 0.0
        if isinstance(sub, tuple):  # interp: list of (c, handle) terms
            acc = math.fsum(c * h.eval(x) for c, h in sub)
            return acc / g.value(s, x)
        lvl = self._deriv_level(s)
        return sub.eval(x) / g.value(lvl, x)

    def _deriv_level(self, s: int) -> int:
        if self.tag == "chain_t":
            return self.family[2] + s
        if self.tag == "chain_az":
            return self.family[2] + s
        return s

    def _deriv_handle(self, s: int):
        """Handle (or term list) whose value / w_level is the s-th derivative."""
        cache = self._state.setdefault("derivs", {})
        if s in cache:
            return cache[s]
        g = self.gauges
        out = None
        if self.tag == "chain_t":
            _, t, j, m = self.family
            if s <= m - j:
                out = WPolyHandle(g, ("chain_t", t, j + s, m), self.part, self.quad)
        elif self.tag == "chain_az":
            _, z, i, k, j = self.family
            lvl = i + s
            if lvl <= j:
                if lvl >= k:
                    out = WPolyHandle(
                        g, ("chain_t", g.interval.a, lvl, j), FULL, self.quad
                    )
                else:
                    out = WPolyHandle(g, ("chain_az", z, lvl, k, j), FULL, self.quad)
        else:
            _, z, coeffs = self.family
            terms = tuple(
                (c, WPolyHandle(g, ("chain_t", z, s, l), FULL, self.quad))
                for l, c in enumerate(coeffs)
                if c != 0.0 and l >= s
            )
            out = terms
        cache[s] = out
        return out

    def pretty(self) -> str:
        ev = self._full_evaluator()
        if isinstance(ev, _ChainT) and isinstance(ev._exact, ExpPoly):
            return ev._exact.pretty()
        if isinstance(ev, _AZChain) and isinstance(ev._exact, ExpPoly):
            return ev._exact.pretty()
        return f"<{self.tag}{self.family[1:]}:{self.part}>"


class _AZChain:
    """Evaluates p_{a,z;i:k:j} for one (z, i, k, j) tuple."""

    def __init__(self, g: GaugeSpec, z: float, i: int, k: int, j: int,
                 quad: QuadConfig):
        if i > k:
            raise DomainError("need i <= k")
        if k > j:
            raise DomainError("need k <= j for the second chain")
        self.g = g
        self.z = z
        self.i = i
        self.k = k
        self.j = j
        self.quad = quad
        self._exact = None
        self._start = _ChainT(g, g.interval.a, k, j, quad)
        if self._start.divergent:
            raise PreconditionError(
                f"(k, j) = ({k}, {j}) is not in the finiteness set; "
                "p_(a;k,j) diverges"
            )
        self._cheb: Optional[ChebChain] = None
        self._prepare()

    def _prepare(self):
        g, z, i, k = self.g, self.z, self.i, self.k
        start = self._start._exact
        if isinstance(start, ExpPoly):
            lam = _lam_getter(g)
            p = start
            for lvl in range(k - 1, i - 1, -1):
                p = p.integrate_from(z).mul_exp(lam(lvl))
            self._exact = p
        elif isinstance(start, PowPoly):
            p = start
            for lvl in range(k - 1, i - 1, -1):
                p = p.integrate_from(z).mul_power(g.lam(lvl) - 1.0)
            self._exact = p

    def eval(self, x: float) -> float:
        if self.i == self.k:
            return self._start.eval(x)
        if self._exact is not None:
            return self._exact.eval(x)
        if self._cheb is None or not (self._cheb.lo <= x <= self._cheb.hi):
            pad = 0.5 * (1.0 + abs(x - self.z))
            lo = min(self.z, x) - pad
            hi = max(self.z, x) + pad
            iv = self.g.interval
            if math.isfinite(iv.a):
                lo = max(lo, iv.a)
            if math.isfinite(iv.b):
                hi = min(hi, iv.b)
            self._cheb = ChebChain(
                self.g,
                levels=range(self.k - 1, self.i - 1, -1),
                anchor=self.z,
                lo=lo,
                hi=hi,
                start_values=lambda xs: np.array(
                    [self._start.eval(float(u)) for u in xs]
                ),
                quad=self.quad,
            )
        return self._cheb.eval(x)


class _InterpSum:
    """sum_l c_l p_{z;0,l} via per-term chain evaluators."""

    def __init__(self, g: GaugeSpec, z: float, coeffs, quad: QuadConfig):
        self.parts = [
            (c, _ChainT(g, z, 0, l, quad))
            for l, c in enumerate(coeffs)
            if c != 0.0
        ]

    def eval(self, x: float) -> float:
        return math.fsum(c * ev.eval(x) for c, ev in self.parts)


def _build_evaluator(g: GaugeSpec, family: tuple, quad: QuadConfig):
    tag = family[0]
    if tag == "chain_t":
        _, t, j, m = family
        return _ChainT(g, t, j, m, quad)
    if tag == "chain_az":
        _, z, i, k, j = family
        return _AZChain(g, z, i, k, j, quad)
    if tag == "interp":
        _, z, coeffs = family
        return _InterpSum(g, z, coeffs, quad)
    raise DomainError(f"unknown family {tag!r}")


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def chain_t_handle(
    g: GaugeSpec,
    t: float,
    j: int,
    m: int,
    part: str = FULL,
    quad: QuadConfig = DEFAULT_QUAD,
) -> WPolyHandle:
    """Handle for p_{t;j,m}; t must lie in [a, b)."""
    iv = g.interval
    if not (t == iv.a or (iv.contains(t) and t < iv.b)):
        raise DomainError(f"anchor t={t} not in [{iv.a}, {iv.b})")
    if not 0 <= j <= m:
        raise DomainError("need 0 <= j <= m")
    return WPolyHandle(g, ("chain_t", float(t), j, m), part, quad)


def chain_az_handle(
    g: GaugeSpec,
    z: float,
    i: int,
    k: int,
    j: int,
    quad: QuadConfig = DEFAULT_QUAD,
) -> WPolyHandle:
    """Handle for p_{a,z;i:k:j}; requires (k, j) in the finiteness set."""
    iv = g.interval
    if not iv.a < z < iv.b:
        raise DomainError(f"z={z} must lie in the open interval ({iv.a}, {iv.b})")
    if not 0 <= i <= k <= j:
        raise DomainError("need 0 <= i <= k <= j")
    h = WPolyHandle(g, ("chain_az", float(z), i, k, j), FULL, quad)
    h._full_evaluator()  # validates (k, j) in F eagerly
    return h


def wpoly_eval(p: WPolyHandle, x: float) -> float:
    """Evaluate a handle; +inf means the defining integral diverges."""
    return p.eval(x)


def wpoly_eval_az(
    z: float,
    i: int,
    k: int,
    j: int,
    g: GaugeSpec,
    x: float,
    quad: QuadConfig = DEFAULT_QUAD,
) -> float:
    return chain_az_handle(g, z, i, k, j, quad).eval(x)


def interpolate(
    g: GaugeSpec,
    z: float,
    c: Sequence[float],
    quad: QuadConfig = DEFAULT_QUAD,
) -> WPolyHandle:
    """The unique w-polynomial p of degree <= k with p^(l)(z) = c_l.

    Realized as the basis combination sum_l c_l p_{z;0,l}.
    """
    g.interval.require(z, "interpolation point")
    coeffs = tuple(float(v) for v in c)
    return WPolyHandle(g, ("interp", float(z), coeffs), FULL, quad)


def chain_t_two_arg(
    g: GaugeSpec, j: int, m: int, quad: QuadConfig = DEFAULT_QUAD
) -> Callable[[float, float], float]:
    """Return a fast (t, x) -> p_{t;j,m}(x) evaluator for finite anchors t.

    For unit/exponential gauges the chain satisfies the translation
    identity p_{t;j,m}(x) = exp(sigma*t) * p_{0;j,m}(x - t) with sigma the
    sum of the exponent parameters over levels j..m, so a single chain
    built at t = 0 serves every anchor.  Other gauges fall back to per-t
    handles with a small cache.
    """
    if isinstance(g, (UnitGauge, ExponentialGauge)):
        lam = _lam_getter(g)
        sigma = math.fsum(lam(s) for s in range(j, m + 1))
        base = _exp_chain(lam, 0.0, j, m) if m > j else ExpPoly.exponential(lam(m))

        def fast(t: float, x: float) -> float:
            return _safe_exp(sigma * t) * base.eval(x - t)

        return fast

    cache: dict = {}

    def slow(t: float, x: float) -> float:
        ev = cache.get(t)
        if ev is None:
            ev = _ChainT(g, t, j, m, quad)
            if len(cache) < 4096:
                cache[t] = ev
        return ev.eval(x)

    return slow
