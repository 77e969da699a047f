"""Exact distributions of signed step sums, by integer-weight convolution.

Everything in this module is exact: a distribution is stored as integer
weights over its support together with the total weight (a power of two), and
probabilities are reported as ``Fraction``.  No floating point enters any
mass.  These oracles are the trust anchor for the statistical tests in the
rest of the package.

Two kinds of laws are covered:

* ``pmf_1d(d)``: the law of ``d[0]*e_0 + ... + d[k-1]*e_{k-1}`` where the
  ``e_i`` are independent uniform signs.
* ``pmf_2d(a)``: the law of a planar walk after ``len(a)`` steps, where step
  ``i`` moves by ``a[i]`` in one of the four axis directions with equal
  probability.

Derived quantities used by the verification module (mod-m probabilities,
sliding-interval suprema, maximal point masses, first-passage probabilities)
are computed from the same exact representations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ParameterError, PreconditionError, SupportBudgetError

#: Cap on the number of exact support points a single computation may allocate.
DEFAULT_SUPPORT_BUDGET = 10_000_000

Number = int | Fraction


def _as_positive_fractions(values: Iterable, what: str) -> list[Fraction]:
    out = []
    for i, v in enumerate(values):
        f = Fraction(v)
        if f <= 0:
            raise ParameterError(f"{what}[{i}] must be > 0, got {v}")
        out.append(f)
    if not out:
        raise ParameterError(f"{what} must be nonempty")
    return out


def _common_scale(fracs: Sequence[Fraction]) -> int:
    scale = 1
    for f in fracs:
        scale = scale * f.denominator // math.gcd(scale, f.denominator)
    return scale


def _present(value: Fraction) -> Number:
    return value.numerator if value.denominator == 1 else value


@dataclass(frozen=True)
class ExactPmf1D:
    """Exact law of a signed sum, as sorted support values and integer weights.

    ``total`` equals ``2**len(steps)`` and ``sum(weights) == total`` exactly.
    The law is symmetric about 0 and supported in ``[-sum(steps), sum(steps)]``.
    """

    values: tuple[Number, ...]
    weights: tuple[int, ...]
    total: int
    steps: tuple[Number, ...]

    def mass(self, value) -> Fraction:
        v = Fraction(value)
        lo, hi = 0, len(self.values)
        while lo < hi:
            mid = (lo + hi) // 2
            if Fraction(self.values[mid]) < v:
                lo = mid + 1
            else:
                hi = mid
        if lo < len(self.values) and Fraction(self.values[lo]) == v:
            return Fraction(self.weights[lo], self.total)
        return Fraction(0)

    @property
    def masses(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(w, self.total) for w in self.weights)

    def as_dict(self) -> dict[Number, Fraction]:
        return {v: Fraction(w, self.total) for v, w in zip(self.values, self.weights)}

    def export_lines(self) -> list[str]:
        """Two-column text format: value and mass as numerator/denominator."""
        out = []
        for v, w in zip(self.values, self.weights):
            m = Fraction(w, self.total)
            out.append(f"{v} {m.numerator}/{m.denominator}")
        return out


@dataclass(frozen=True)
class ExactPmf2D:
    """Exact law of the planar walk after ``len(steps)`` steps.

    Invariant under the dihedral symmetries of the axis-direction set:
    ``(x, y) -> (-x, y), (x, -y), (y, x)``.
    """

    points: tuple[tuple[Number, Number], ...]
    weights: tuple[int, ...]
    total: int
    steps: tuple[Number, ...]

    def mass(self, point) -> Fraction:
        key = (Fraction(point[0]), Fraction(point[1]))
        for p, w in zip(self.points, self.weights):
            if (Fraction(p[0]), Fraction(p[1])) == key:
                return Fraction(w, self.total)
        return Fraction(0)

    def as_dict(self) -> dict[tuple[Number, Number], Fraction]:
        return {p: Fraction(w, self.total) for p, w in zip(self.points, self.weights)}

    def export_lines(self) -> list[str]:
        """Three-column text format: x, y, mass as numerator/denominator."""
        out = []
        for (x, y), w in zip(self.points, self.weights):
            m = Fraction(w, self.total)
            out.append(f"{x} {y} {m.numerator}/{m.denominator}")
        return out


def _scaled_int_steps(d: Sequence, what: str, budget: int, square: bool = False):
    """Scale positive rational steps to a common integer lattice and check the budget."""
    fracs = _as_positive_fractions(d, what)
    scale = _common_scale(fracs)
    ints = [int(f * scale) for f in fracs]
    span = sum(ints)
    width = 2 * span + 1
    required = width * width if square else width
    if required > budget:
        raise SupportBudgetError(
            f"exact support needs {required} points, exceeding the budget of {budget}",
            required=required,
            budget=budget,
        )
    return fracs, ints, scale, span


def pmf_1d(d: Sequence, *, support_budget: int = DEFAULT_SUPPORT_BUDGET) -> ExactPmf1D:
    """Exact law of the signed sum of the positive steps ``d``.

    Computed by iterated convolution over a dense integer lattice; the result
    carries exact rational masses with denominator ``2**len(d)``.
    """
    fracs, ints, scale, span = _scaled_int_steps(d, "d", support_budget)
    width = 2 * span + 1
    w = [0] * width
    w[span] = 1
    lo = hi = span  # occupied index window
    for s in ints:
        new = [0] * width
        for i in range(lo, hi + 1):
            v = w[i]
            if v:
                new[i - s] += v
                new[i + s] += v
        w = new
        lo -= s
        hi += s
    values = []
    weights = []
    for i, v in enumerate(w):
        if v:
            values.append(_present(Fraction(i - span, scale)))
            weights.append(v)
    return ExactPmf1D(
        values=tuple(values),
        weights=tuple(weights),
        total=1 << len(ints),
        steps=tuple(_present(f) for f in fracs),
    )


def pmf_2d(a: Sequence, *, support_budget: int = DEFAULT_SUPPORT_BUDGET) -> ExactPmf2D:
    """Exact law of the planar walk with step sizes ``a``."""
    fracs, ints, scale, _span = _scaled_int_steps(a, "a", support_budget, square=True)
    cur: dict[tuple[int, int], int] = {(0, 0): 1}
    for s in ints:
        new: dict[tuple[int, int], int] = {}
        for (x, y), wt in cur.items():
            for nx, ny in ((x + s, y), (x - s, y), (x, y + s), (x, y - s)):
                key = (nx, ny)
                new[key] = new.get(key, 0) + wt
        cur = new
    points = sorted(cur)
    return ExactPmf2D(
        points=tuple(
            (_present(Fraction(x, scale)), _present(Fraction(y, scale))) for x, y in points
        ),
        weights=tuple(cur[p] for p in points),
        total=1 << (2 * len(ints)),
        steps=tuple(_present(f) for f in fracs),
    )


def _int_steps_only(d: Sequence) -> list[int]:
    out = []
    for i, v in enumerate(d):
        f = Fraction(v)
        if f.denominator != 1:
            raise ParameterError(f"d[{i}] must be an integer for modular arithmetic, got {v}")
        if f <= 0:
            raise ParameterError(f"d[{i}] must be > 0, got {v}")
        out.append(f.numerator)
    if not out:
        raise ParameterError("d must be nonempty")
    return out


def mod_probability(
    d: Sequence,
    m: int,
    residue: int,
    *,
    method: str = "auto",
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> Fraction:
    """Exact probability that the signed sum of ``d`` is ``residue`` mod ``m``.

    ``method`` selects one of two exact routes that are cross-checked in the
    test suite: ``"residue"`` convolves over the m residue classes (memory
    proportional to m), ``"full"`` folds the full support law (memory
    proportional to ``sum(d)``).  ``"auto"`` picks the residue route whenever
    the full support would be large.
    """
    ints = _int_steps_only(d)
    if m < 1:
        raise ParameterError("modulus m must be >= 1")
    if not 0 <= residue < m:
        raise ParameterError("residue must lie in [0, m)")
    if method not in ("auto", "residue", "full"):
        raise ParameterError("method must be one of auto|residue|full")
    if method == "auto":
        method = "full" if 2 * sum(ints) + 1 <= 4096 else "residue"
    if method == "full":
        law = pmf_1d(ints, support_budget=support_budget)
        acc = Fraction(0)
        for v, w in zip(law.values, law.weights):
            if v % m == residue:
                acc += Fraction(w, law.total)
        return acc
    vec = [0] * m
    vec[0] = 1
    for s in ints:
        sm = s % m
        new = [0] * m
        for r in range(m):
            wt = vec[r]
            if wt:
                new[(r + sm) % m] += wt
                new[(r - sm) % m] += wt
        vec = new
    return Fraction(vec[residue], 1 << len(ints))


def mod_probability_profile(
    d: Sequence, m: int, *, support_budget: int = DEFAULT_SUPPORT_BUDGET
) -> list[Fraction]:
    """Exact probabilities for every residue class mod ``m``, residue route."""
    ints = _int_steps_only(d)
    if m < 1:
        raise ParameterError("modulus m must be >= 1")
    vec = [0] * m
    vec[0] = 1
    for s in ints:
        sm = s % m
        new = [0] * m
        for r in range(m):
            wt = vec[r]
            if wt:
                new[(r + sm) % m] += wt
                new[(r - sm) % m] += wt
        vec = new
    total = 1 << len(ints)
    return [Fraction(w, total) for w in vec]


def sup_pmf(d: Sequence, *, support_budget: int = DEFAULT_SUPPORT_BUDGET) -> Fraction:
    """Largest point mass of the signed-sum law of ``d``."""
    law = pmf_1d(d, support_budget=support_budget)
    return Fraction(max(law.weights), law.total)


def max_interval_probability(
    d: Sequence,
    half_width,
    *,
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> tuple[Fraction, Number]:
    """Exact supremum over x of the mass in the half-open window (x-D, x+D].

    Requires every step to be at least ``half_width`` (the anti-concentration
    bound this feeds only holds in that regime).  Returns the supremum and one
    maximizing center x.  The supremum over real x is attained with the right
    window edge on a support point, so a sliding window over the sorted
    support is exhaustive.
    """
    D = Fraction(half_width)
    if D <= 0:
        raise ParameterError("half-width D must be > 0")
    fracs = _as_positive_fractions(d, "d")
    for i, f in enumerate(fracs):
        if f < D:
            raise PreconditionError(f"step d[{i}]={f} is smaller than the half-width D={D}")
    scale = _common_scale(fracs + [D])
    ints = [int(f * scale) for f in fracs]
    Ds = int(D * scale)
    span = sum(ints)
    if 2 * span + 1 > support_budget:
        raise SupportBudgetError(
            f"exact support needs {2 * span + 1} points, exceeding the budget of {support_budget}",
            required=2 * span + 1,
            budget=support_budget,
        )
    law = pmf_1d(ints, support_budget=support_budget)
    vals = [int(v) for v in law.values]
    weights = law.weights
    best = 0
    best_right = vals[0]
    left = 0
    window = 0
    for j, vj in enumerate(vals):
        window += weights[j]
        # shrink until window covers (vj - 2D, vj]
        while vals[left] <= vj - 2 * Ds:
            window -= weights[left]
            left += 1
        if window > best:
            best = window
            best_right = vj
    sup = Fraction(best, law.total)
    center = _present(Fraction(best_right, scale) - D)
    return sup, center


def hit_probability_2d(
    a: Sequence,
    target: tuple[int, int],
    horizon: int,
    *,
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> Fraction:
    """Exact probability that the walk visits ``target`` at some step 1..horizon.

    Dynamic programming over the exact prefix laws with the target absorbing
    from step 1 onward.  The position at step 0 does not count as a visit.
    """
    if horizon < 0:
        raise ParameterError("horizon must be >= 0")
    steps_list = list(a)
    if steps_list:
        _, ints, scale, _ = _scaled_int_steps(steps_list, "a", support_budget, square=True)
    else:
        ints, scale = [], 1
    if horizon > len(ints):
        raise ParameterError(f"horizon {horizon} exceeds the {len(ints)} provided step sizes")
    tx, ty = Fraction(target[0]) * scale, Fraction(target[1]) * scale
    if tx.denominator != 1 or ty.denominator != 1:
        return Fraction(0)
    tkey = (int(tx), int(ty))
    state: dict[tuple[int, int], int] = {(0, 0): 1}
    absorbed = Fraction(0)
    for n in range(horizon):
        s = ints[n]
        new: dict[tuple[int, int], int] = {}
        for (x, y), wt in state.items():
            for nx, ny in ((x + s, y), (x - s, y), (x, y + s), (x, y - s)):
                key = (nx, ny)
                new[key] = new.get(key, 0) + wt
        hit = new.pop(tkey, 0)
        if hit:
            absorbed += Fraction(hit, 1 << (2 * (n + 1)))
        state = new
    return absorbed


@dataclass(frozen=True)
class HoeffdingTail:
    """Sub-Gaussian tail bound next to the exact tail it dominates."""

    threshold: Fraction
    sum_squares: Fraction
    bound_raw: float
    bound: float
    exact_tail: Fraction | None

    def to_json_dict(self) -> dict:
        return {
            "threshold": str(self.threshold),
            "sum_squares": str(self.sum_squares),
            "bound_raw": self.bound_raw,
            "bound": self.bound,
            "exact_tail": None if self.exact_tail is None else str(self.exact_tail),
        }


def hoeffding_tail(
    d: Sequence,
    t,
    *,
    support_budget: int = DEFAULT_SUPPORT_BUDGET,
) -> HoeffdingTail:
    """Evaluate ``2*exp(-t^2 / (2*sum(d_i^2)))`` against the exact tail.

    The raw bound can exceed 1 for small ``t``; the clamped value is also
    reported.  When the support budget permits, the exact ``P(|T| >= t)`` is
    computed from the signed-sum law for side-by-side comparison.
    """
    tf = Fraction(t)
    if tf <= 0:
        raise ParameterError("threshold t must be > 0")
    fracs = _as_positive_fractions(d, "d")
    ssq = sum(f * f for f in fracs)
    raw = 2.0 * math.exp(-float(tf * tf) / float(2 * ssq))
    exact: Fraction | None
    try:
        law = pmf_1d(fracs, support_budget=support_budget)
    except SupportBudgetError:
        exact = None
    else:
        exact = Fraction(0)
        for v, w in zip(law.values, law.weights):
            if abs(Fraction(v)) >= tf:
                exact += Fraction(w, law.total)
    return HoeffdingTail(
        threshold=tf,
        sum_squares=ssq,
        bound_raw=raw,
        bound=min(raw, 1.0),
        exact_tail=exact,
    )


def parse_pmf1d_lines(lines: Iterable[str]) -> dict[Fraction, Fraction]:
    """Parse the two-column export format back into a value -> mass map."""
    out: dict[Fraction, Fraction] = {}
    for ln in lines:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        val, mass = ln.split()
        out[Fraction(val)] = Fraction(mass)
    return out
