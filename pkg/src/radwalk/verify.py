"""Executable checks for the inequalities the simulations rely on.

Each check pairs an exact quantity (from :mod:`radwalk.exact`) or a controlled
Monte Carlo experiment (from :mod:`radwalk.walk` streams) with the bound it
must respect, and reports structured pass/fail records.  Probabilities stay
exact rationals; logarithms and exponentials use floats with stated
tolerances, and pass/fail decisions are made on exact integer or rational
comparisons wherever the quantity is rational.

The drift check concerns the log potential ``f(x, y) = log(x^2 + y^2 - 1/2)``
(with ``f(0,0) = -5``): its one-step mean change Delta under a unit-step walk
is never positive away from the origin.  Writing ``E = 2x^2 + 2y^2 - 1``,
the four neighbor arguments are integers over 2 and

    exp(4*Delta) = prod(neighbors)/E^4 = 1 - 64*(x^2-y^2)^2 / E^4

for |x|+|y| >= 2, an exact integer identity this module verifies verbatim;
at |x|+|y| = 1 the origin's special value enters and exp(4*Delta) = 126/e^5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact as _exact
from . import rng as _rng
from .errors import ParameterError, PreconditionError
from .rng import ConfidenceInterval, wilson_interval

#: Value assigned to the log potential at the origin.
ORIGIN_POTENTIAL = -5.0

#: Relative agreement tolerance between the two drift computations.
DRIFT_AGREEMENT_TOL = 1e-12


def log_potential(x: int, y: int) -> float:
    """log(x^2 + y^2 - 1/2), with the origin pinned at -5."""
    if x == 0 and y == 0:
        return ORIGIN_POTENTIAL
    return math.log(x * x + y * y - 0.5)


def _relative_gap(a: float, b: float) -> float:
    """|a - b| relative to max(1, |a|, |b|).

    The floor at 1 makes the metric meaningful when the true value is 0 (the
    drift vanishes exactly on the diagonals); fixed double precision cannot
    meet a pure relative tolerance at a zero of the function.
    """
    return abs(a - b) / max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class DeltaReport:
    """One-step mean change of the log potential at a lattice point.

    ``exp4_closed`` is the exact rational value of exp(4*Delta) for generic
    points and the float 126/e^5 for origin neighbors.  ``identity_exact``
    records whether the integer identity behind the closed form held verbatim
    (generic points only; True vacuously for neighbors).
    """

    point: tuple[int, int]
    classification: str  # "origin-neighbor" | "generic"
    delta_direct: float
    delta_closed: float
    exp4_closed: Fraction | float
    agreement: float
    identity_exact: bool

    @property
    def agrees(self) -> bool:
        return self.agreement <= DRIFT_AGREEMENT_TOL


def _neighbor_product(x: int, y: int) -> int:
    # 2*(x')^2 + 2*(y')^2 - 1 over the four neighbors; all nonzero since
    # |x|+|y| >= 2 keeps every neighbor away from the origin.
    out = 1
    for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
        out *= 2 * nx * nx + 2 * ny * ny - 1
    return out


def supermartingale_delta(x: int, y: int) -> DeltaReport:
    """Delta at (x, y), computed two ways: the direct four-neighbor average of
    the log potential, and the closed form for exp(4*Delta)."""
    if x == 0 and y == 0:
        raise ParameterError("Delta is undefined at the origin (the walk stops there)")
    delta_direct = (
        log_potential(x + 1, y)
        + log_potential(x - 1, y)
        + log_potential(x, y + 1)
        + log_potential(x, y - 1)
    ) / 4.0 - log_potential(x, y)
    if abs(x) + abs(y) == 1:
        exp4: Fraction | float = 126.0 * math.exp(-5.0)
        delta_closed = (math.log(126.0) - 5.0) / 4.0
        identity = True
        classification = "origin-neighbor"
    else:
        E = 2 * x * x + 2 * y * y - 1
        num = 64 * (x * x - y * y) ** 2
        den = E**4
        exp4 = 1 - Fraction(num, den)
        # the closed form restates the integer factorization of the product
        identity = _neighbor_product(x, y) == den - num
        # log1p on the exact ratio keeps precision when exp4 is near 1
        delta_closed = math.log1p(-float(Fraction(num, den))) / 4.0
        classification = "generic"
    return DeltaReport(
        point=(x, y),
        classification=classification,
        delta_direct=delta_direct,
        delta_closed=delta_closed,
        exp4_closed=exp4,
        agreement=_relative_gap(delta_direct, delta_closed),
        identity_exact=identity,
    )


@dataclass(frozen=True)
class DriftGridReport:
    """Exhaustive drift scan over 1 <= |x|+|y| <= radius."""

    radius: int
    points: int
    max_delta: float
    max_delta_point: tuple[int, int]
    max_agreement_gap: float
    nonpositive: bool  # exact: every exp(4*Delta) <= 1
    identity_failures: int  # generic points whose integer identity broke
    equality_diagonal_only: bool  # Delta == 0 exactly iff |x| == |y|
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "radius": self.radius,
            "points": self.points,
            "max_delta": self.max_delta,
            "max_delta_point": list(self.max_delta_point),
            "max_agreement_gap": self.max_agreement_gap,
            "nonpositive": self.nonpositive,
            "identity_failures": self.identity_failures,
            "equality_diagonal_only": self.equality_diagonal_only,
            "passed": self.passed,
        }


def verify_supermartingale(radius: int, *, tol: float = DRIFT_AGREEMENT_TOL) -> DriftGridReport:
    """Check Delta <= 0 (exactly) and the two-route agreement on the grid.

    A violation makes the report fail; nothing raises.
    """
    if radius < 1:
        raise ParameterError("radius must be >= 1")
    # Cache the potential on the grid; each value feeds five direct deltas.
    size = 2 * radius + 3
    off = radius + 1
    F = np.empty((size, size), dtype=np.float64)
    for ix in range(size):
        x = ix - off
        for iy in range(size):
            y = iy - off
            F[ix, iy] = ORIGIN_POTENTIAL if (x == 0 and y == 0) else math.log(
                x * x + y * y - 0.5
            )
    points = 0
    max_delta = -math.inf
    max_delta_point = (0, 0)
    max_gap = 0.0
    nonpositive = True
    identity_failures = 0
    equality_ok = True
    for x in range(-radius, radius + 1):
        for y in range(-radius, radius + 1):
            s = abs(x) + abs(y)
            if s < 1 or s > radius:
                continue
            points += 1
            ix, iy = x + off, y + off
            delta_direct = (
                F[ix + 1, iy] + F[ix - 1, iy] + F[ix, iy + 1] + F[ix, iy - 1]
            ) / 4.0 - F[ix, iy]
            if s == 1:
                delta_closed = (math.log(126.0) - 5.0) / 4.0
                if not delta_closed <= 0.0:
                    nonpositive = False
                if x * x == y * y:  # cannot happen at s == 1; guard consistency
                    equality_ok = False
            else:
                E = 2 * x * x + 2 * y * y - 1
                num = 64 * (x * x - y * y) ** 2
                den = E**4
                if _neighbor_product(x, y) != den - num:
                    identity_failures += 1
                if num < 0:  # exact nonpositivity: exp(4 Delta) = 1 - num/den <= 1
                    nonpositive = False
                if (num == 0) != (x * x == y * y):
                    equality_ok = False
                delta_closed = math.log1p(-num / den) / 4.0
            gap = _relative_gap(delta_direct, delta_closed)
            max_gap = max(max_gap, gap)
            if delta_closed > max_delta:
                max_delta = delta_closed
                max_delta_point = (x, y)
    passed = nonpositive and identity_failures == 0 and max_gap <= tol and equality_ok
    return DriftGridReport(
        radius=radius,
        points=points,
        max_delta=max_delta,
        max_delta_point=max_delta_point,
        max_agreement_gap=max_gap,
        nonpositive=nonpositive,
        identity_failures=identity_failures,
        equality_diagonal_only=equality_ok,
        passed=passed,
    )


@dataclass(frozen=True)
class BoundComparison:
    """An exact quantity against the bound it must not exceed."""

    exact: Fraction
    bound: float
    slack: float
    passed: bool
    params: dict

    def to_json_dict(self) -> dict:
        return {
            "exact": str(self.exact),
            "exact_float": float(self.exact),
            "bound": self.bound,
            "slack": self.slack,
            "passed": self.passed,
            "params": {k: str(v) if isinstance(v, Fraction) else v for k, v in self.params.items()},
        }


def verify_elo(d: Sequence, half_width, **exact_kwargs) -> BoundComparison:
    """Interval anti-concentration: sup_x P(T in (x-D, x+D]) <= 0.8/sqrt(m).

    The pass decision is exact: sup^2 * m <= 16/25.
    """
    sup, _x = _exact.max_interval_probability(d, half_width, **exact_kwargs)
    m = len(list(d))
    passed = sup * sup * m <= Fraction(16, 25)
    bound = 0.8 / math.sqrt(m)
    return BoundComparison(
        exact=sup,
        bound=bound,
        slack=bound - float(sup),
        passed=passed,
        params={"m": m, "D": Fraction(half_width)},
    )


@dataclass(frozen=True)
class ModLemmaReport:
    """Worst residue-class mass and its anti-concentration ratio.

    ``ratio`` is sup_M P * k / log k with k the number of distinct steps; the
    ratio is None for k < 2 (log k vanishes).  ``passed`` compares the ratio
    against the configured cap, or is None when the ratio is undefined.
    """

    k: int
    m: int
    sup: Fraction
    arg_residue: int
    ratio: float | None
    cap: float
    passed: bool | None

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "sup": str(self.sup),
            "sup_float": float(self.sup),
            "arg_residue": self.arg_residue,
            "ratio": self.ratio,
            "cap": self.cap,
            "passed": self.passed,
        }


def verify_mod_lemma(
    d: Sequence,
    m: int,
    *,
    cap: float = 10.0,
    support_budget: int = _exact.DEFAULT_SUPPORT_BUDGET,
) -> ModLemmaReport:
    """Exact sup over residues M of P(T = M mod m), and the measured constant.

    Requires m to be at least the largest of the distinct step values (the
    anti-concentration statement needs the modulus to dominate the steps).
    """
    steps = [int(v) for v in d]
    distinct = sorted(set(steps))
    k = len(distinct)
    if m < max(distinct):
        raise PreconditionError(
            f"modulus {m} is smaller than the largest distinct step {max(distinct)}"
        )
    profile = _exact.mod_probability_profile(steps, m, support_budget=support_budget)
    sup = max(profile)
    arg = profile.index(sup)
    if k >= 2:
        ratio = float(sup) * k / math.log(k)
        passed: bool | None = ratio <= cap
    else:
        ratio = None
        passed = None
    return ModLemmaReport(
        k=k, m=m, sup=sup, arg_residue=arg, ratio=ratio, cap=cap, passed=passed
    )


@dataclass(frozen=True)
class HittingTimeResult:
    """First-passage experiment: start at distance r, horizon floor(r^3)."""

    r: float
    step: int
    start: tuple[int, int]
    horizon: int
    trials: int
    successes: int
    estimate: float
    ci: ConfidenceInterval
    exact: Fraction | None
    master_seed: object
    rng_id: str = _rng.RNG_ID
    seed_rule: str = _rng.SEED_RULE_ID

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "step": self.step,
            "start": list(self.start),
            "horizon": self.horizon,
            "trials": self.trials,
            "successes": self.successes,
            "estimate": self.estimate,
            "ci": self.ci.to_json_dict(),
            "exact": None if self.exact is None else str(self.exact),
            "master_seed": list(self.master_seed)
            if isinstance(self.master_seed, tuple)
            else self.master_seed,
            "rng_id": self.rng_id,
            "seed_rule": self.seed_rule,
        }


def _exact_hitting_dp(start: tuple[int, int], horizon: int) -> Fraction:
    """Exact P(hit the origin within ``horizon`` unit steps) by absorbing DP."""
    state: dict[tuple[int, int], Fraction] = {start: Fraction(1)}
    absorbed = Fraction(0)
    if start == (0, 0):
        return Fraction(1)
    for _ in range(horizon):
        new: dict[tuple[int, int], Fraction] = {}
        for (x, y), p in state.items():
            q = p / 4
            for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
                key = (nx, ny)
                new[key] = new.get(key, Fraction(0)) + q
        absorbed += new.pop((0, 0), Fraction(0))
        state = new
    return absorbed


def _ring_points(r: float) -> list[tuple[int, int]]:
    """Lattice points with norm in [r, r+1), sorted for deterministic indexing."""
    out = []
    hi = int(math.floor(r + 1))
    for x in range(-hi, hi + 1):
        for y in range(-hi, hi + 1):
            if r * r <= x * x + y * y < (r + 1) * (r + 1):
                out.append((x, y))
    return sorted(out)


def hitting_time_experiment(
    r,
    step: int = 1,
    trials: int = 10_000,
    master_seed=0,
    *,
    level: float = 0.95,
    workers: int = 1,
    exact_radius_cap: int = 2,
    start_mode: str = "axis",
) -> HittingTimeResult:
    """Estimate P(walk from distance r hits the origin within floor(r^3) steps).

    The walk takes steps of one fixed size on the correspondingly scaled
    lattice.  The start is the deterministic axis point (ceil(r)*step, 0) by
    default; ``start_mode="ring"`` instead draws, per trial, a uniform lattice
    point with norm in [r, r+1) (one extra draw ahead of the direction
    stream).  For axis starts with r <= ``exact_radius_cap`` the exact value
    is also computed by dynamic programming and returned for cross-checking.
    """
    if r < 0:
        raise ParameterError("r must be >= 0")
    if step < 1:
        raise ParameterError("step must be a positive integer")
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if start_mode not in ("axis", "ring"):
        raise ParameterError("start_mode must be 'axis' or 'ring'")
    horizon = int(math.floor(float(r) ** 3))
    start_units = int(math.ceil(r))
    start = (start_units * step, 0)
    ring = _ring_points(float(r)) if start_mode == "ring" else None
    exact: Fraction | None = None
    if start_mode == "axis" and r <= exact_radius_cap:
        exact = _exact_hitting_dp((start_units, 0), horizon)
    if (start_mode == "axis" and start_units == 0) or (ring == [(0, 0)]):
        # already at the origin; every trial succeeds at time 0
        return HittingTimeResult(
            r=float(r),
            step=step,
            start=start,
            horizon=horizon,
            trials=trials,
            successes=trials,
            estimate=1.0,
            ci=wilson_interval(trials, trials, level),
            exact=Fraction(1) if exact is None else exact,
            master_seed=master_seed,
        )

    def run_chunk(chunk: range) -> int:
        hits = 0
        for t in chunk:
            if horizon == 0:
                continue
            if ring is None:
                x0, y0 = start_units, 0
                codes = _rng.direction_codes(master_seed, t, horizon)
            else:
                gen = _rng.trial_generator(master_seed, t)
                x0, y0 = ring[int(gen.integers(0, len(ring)))]
                codes = gen.integers(0, _rng.NUM_DIRECTIONS, size=horizon, dtype=np.int64)
            dx = (codes == 0).astype(np.int64) - (codes == 1).astype(np.int64)
            dy = (codes == 2).astype(np.int64) - (codes == 3).astype(np.int64)
            xs = x0 + np.cumsum(dx)
            ys = y0 + np.cumsum(dy)
            if bool(np.any((xs == 0) & (ys == 0))):
                hits += 1
        return hits

    successes = _rng.map_trial_chunks(trials, run_chunk, sum, workers=workers)
    return HittingTimeResult(
        r=float(r),
        step=step,
        start=start,
        horizon=horizon,
        trials=trials,
        successes=successes,
        estimate=successes / trials,
        ci=wilson_interval(successes, trials, level),
        exact=exact,
        master_seed=master_seed,
    )


@dataclass(frozen=True)
class TrendRow:
    k: int
    sup: Fraction
    ratio: float  # sup * k**1.5


@dataclass(frozen=True)
class SupPmfTrendReport:
    """Maximal point masses of the laws with steps 1..k, against C/k^{3/2}.

    ``passed`` asserts boundedness over the tested range: every ratio stays
    under ``ratio_cap`` and the least-squares slope of ratio against log k
    over k >= ``k_floor`` stays under ``slope_cap``.
    """

    rows: tuple[TrendRow, ...]
    ratio_cap: float
    slope_cap: float
    k_floor: int
    max_ratio: float
    slope: float | None
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "rows": [
                {"k": r.k, "sup": str(r.sup), "ratio": r.ratio} for r in self.rows
            ],
            "ratio_cap": self.ratio_cap,
            "slope_cap": self.slope_cap,
            "k_floor": self.k_floor,
            "max_ratio": self.max_ratio,
            "slope": self.slope,
            "passed": self.passed,
        }


def sup_pmf_trend(
    k_max: int,
    *,
    k_floor: int = 8,
    ratio_cap: float = 2.0,
    slope_cap: float = 0.1,
    support_budget: int = _exact.DEFAULT_SUPPORT_BUDGET,
) -> SupPmfTrendReport:
    """Tabulate sup_z P(T_k = z) for steps (1..k), k = 1..k_max."""
    if k_max < 1:
        raise ParameterError("k_max must be >= 1")
    rows = []
    for k in range(1, k_max + 1):
        sup = _exact.sup_pmf(list(range(1, k + 1)), support_budget=support_budget)
        rows.append(TrendRow(k=k, sup=sup, ratio=float(sup) * k**1.5))
    tail = [(math.log(r.k), r.ratio) for r in rows if r.k >= k_floor]
    slope: float | None = None
    if len(tail) >= 2:
        xs = [t[0] for t in tail]
        ys = [t[1] for t in tail]
        xbar = sum(xs) / len(xs)
        ybar = sum(ys) / len(ys)
        denom = sum((u - xbar) ** 2 for u in xs)
        slope = sum((u - xbar) * (v - ybar) for u, v in zip(xs, ys)) / denom
    max_ratio = max(r.ratio for r in rows)
    passed = max_ratio <= ratio_cap and (slope is None or slope <= slope_cap)
    return SupPmfTrendReport(
        rows=tuple(rows),
        ratio_cap=ratio_cap,
        slope_cap=slope_cap,
        k_floor=k_floor,
        max_ratio=max_ratio,
        slope=slope,
        passed=passed,
    )
