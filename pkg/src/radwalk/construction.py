"""Recurrent-sequence construction from a good set of integers.

A set of positive integers is *good* when every element has infinitely many
coprime partners inside the set.  From a finite prefix of such a set this
module builds, round by round, a step sequence designed to revisit the
origin: each round picks a fresh coprime pair (b', b''), finds the minimal
positive solution of ``c'b' - c''b'' = 1``, and emits ``N0`` periods of the
pattern (c' copies of b', then c'' copies of b'').  Grouping one period into
a single composite step gives an irreducible mean-zero walk on the integer
lattice, so a horizon ``N0`` with

    P(composite walk visits z within N0 periods) >= 1/2   for all |z| <= C

exists for every radius C.  No closed form for ``N0`` is available, so it is
*estimated*: a doubling grid of horizons is searched until the Wilson lower
confidence bound of the hit probability clears 1/2 for every target in the
disk, within a configurable horizon cap and target budget.  When the search
ends uncertified the result says so; it never silently succeeds.

Fair warning from the numbers themselves: hit probabilities of exact lattice
points in the plane grow only logarithmically with the horizon (measured
slope here: roughly 0.015 per e-fold for the (2,3) pair), so the certified
level of 1/2 sits at horizons around 1e13 periods even for C = 0.  At desk
scale these searches report ``inconclusive`` with their best lower bounds,
which is the honest outcome.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rng as _rng
from .errors import CoprimalityError, ExhaustionError, ParameterError
from .rng import wilson_interval
from .sequences import StepSequence


@dataclass(frozen=True)
class BezoutPair:
    """Coprime pair with the minimal positive coefficients c1*b1 - c2*b2 = 1."""

    b1: int
    b2: int
    c1: int
    c2: int

    @property
    def period(self) -> int:
        return self.c1 + self.c2

    def pattern(self) -> list[int]:
        return [self.b1] * self.c1 + [self.b2] * self.c2


def positive_bezout(b1: int, b2: int) -> BezoutPair:
    """Minimal positive integers (c1, c2) with ``c1*b1 - c2*b2 == 1``.

    c1 is the inverse of b1 modulo b2 normalized to {1..b2}; when that makes
    c2 zero (only for b1 == 1) the next solution c1 + b2 is taken, so both
    coefficients are always >= 1.
    """
    if b1 < 1 or b2 < 1:
        raise ParameterError("both integers must be >= 1")
    g = math.gcd(b1, b2)
    if g != 1:
        raise CoprimalityError(f"{b1} and {b2} are not coprime (gcd {g})", gcd=g)
    if b2 == 1:
        c1 = 1 if b1 > 1 else 2
        return BezoutPair(b1, b2, c1, c1 * b1 - 1)
    c1 = pow(b1, -1, b2)
    if c1 == 0:
        c1 = b2
    c2, rem = divmod(c1 * b1 - 1, b2)
    assert rem == 0
    if c2 == 0:
        c1 += b2
        c2 = (c1 * b1 - 1) // b2
    return BezoutPair(b1, b2, c1, c2)


class GoodSetPrefix:
    """A finite prefix of a candidate good set, with per-element used flags."""

    def __init__(self, elements: Sequence[int]):
        elems = list(elements)
        if not elems:
            raise ParameterError("the prefix must be nonempty")
        seen = set()
        for e in elems:
            if not isinstance(e, int) or e < 1:
                raise ParameterError(f"elements must be positive integers, got {e!r}")
            if e in seen:
                raise ParameterError(f"elements must be distinct, {e} repeats")
            seen.add(e)
        self.elements = tuple(elems)
        self.used = [False] * len(elems)

    @classmethod
    def from_file(cls, path) -> "GoodSetPrefix":
        values = []
        with open(path, "r", encoding="utf-8") as fh:
            for ln in fh:
                ln = ln.strip()
                if ln and not ln.startswith("#"):
                    values.append(int(ln))
        return cls(values)

    def unused_indices(self) -> list[int]:
        return [i for i, u in enumerate(self.used) if not u]

    def __len__(self) -> int:
        return len(self.elements)


def pick_pair(prefix: GoodSetPrefix) -> tuple[int, int]:
    """Pick the next coprime pair: the smallest-index unused element, and the
    smallest-index unused element coprime to it.  Both are marked used."""
    free = prefix.unused_indices()
    if not free:
        raise ExhaustionError("no unused elements remain in the prefix")
    i = free[0]
    b1 = prefix.elements[i]
    for j in free[1:]:
        b2 = prefix.elements[j]
        if math.gcd(b1, b2) == 1:
            prefix.used[i] = True
            prefix.used[j] = True
            return b1, b2
    raise ExhaustionError(
        f"no unused coprime partner for {b1} in the prefix; it may be too short"
    )


@dataclass(frozen=True)
class GoodSetReport:
    """Coprime-partner counts inside a prefix; zero-partner elements flagged."""

    elements: tuple[int, ...]
    partner_counts: tuple[int, ...]
    flagged: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.flagged


def check_good_set(prefix: GoodSetPrefix, horizon: int | None = None) -> GoodSetReport:
    """Count, for each element, its coprime partners among the first ``horizon``."""
    elems = prefix.elements if horizon is None else prefix.elements[:horizon]
    if not elems:
        raise ParameterError("horizon must keep at least one element")
    counts = []
    flagged = []
    for b in elems:
        c = sum(1 for other in elems if other != b and math.gcd(b, other) == 1)
        counts.append(c)
        if c == 0:
            flagged.append(b)
    return GoodSetReport(tuple(elems), tuple(counts), tuple(flagged))


# ---------------------------------------------------------------------------
# N0 estimation
# ---------------------------------------------------------------------------


def _disk_targets(radius: int) -> list[tuple[int, int]]:
    if radius == 0:
        return [(0, 0)]
    r2 = radius * radius
    out = []
    for x in range(-radius, radius + 1):
        ymax = math.isqrt(r2 - x * x)
        for y in range(-ymax, ymax + 1):
            out.append((x, y))
    return out


@dataclass(frozen=True)
class N0Estimate:
    """Outcome of the horizon search for one pair and radius.

    ``status`` is "certified" when some tested horizon had Wilson lower bound
    >= 1/2 for every target in the disk, else "inconclusive"; ``n0`` is the
    certified horizon or the cap actually examined.  Lower bounds are per
    target when the disk is small, otherwise only the worst one is kept.
    """

    status: str
    n0: int
    pair: BezoutPair
    radius: int
    confidence: float
    trials: int
    master_seed: object
    grid: tuple[int, ...]
    target_count: int
    evaluated_targets: int
    worst_lb: float
    worst_target: tuple[int, int] | None
    per_target_lb: tuple[tuple[tuple[int, int], float], ...] | None
    reason: str | None

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "n0": self.n0,
            "pair": [self.pair.b1, self.pair.b2, self.pair.c1, self.pair.c2],
            "radius": self.radius,
            "confidence": self.confidence,
            "trials": self.trials,
            "master_seed": list(self.master_seed)
            if isinstance(self.master_seed, tuple)
            else self.master_seed,
            "grid": list(self.grid),
            "target_count": self.target_count,
            "evaluated_targets": self.evaluated_targets,
            "worst_lb": self.worst_lb,
            "worst_target": list(self.worst_target) if self.worst_target else None,
            "per_target_lb": None
            if self.per_target_lb is None
            else [[list(t), lb] for t, lb in self.per_target_lb],
            "reason": self.reason,
        }


def _doubling_grid(start: int, cap: int) -> list[int]:
    grid = []
    h = start
    while h < cap:
        grid.append(h)
        h *= 2
    grid.append(cap)
    return grid


def estimate_N0(
    pair: BezoutPair,
    radius: int,
    *,
    confidence: float = 0.95,
    trials: int = 1000,
    master_seed=0,
    horizon_start: int = 16,
    horizon_cap: int = 1 << 14,
    target_budget: int = 20_000,
    per_target_report_cap: int = 64,
    workers: int = 1,
) -> N0Estimate:
    """Search a doubling horizon grid for the smallest certified N0.

    One simulation pass at the cap records, per trial and per target, the
    first period index at which the composite walk hits the target; every
    grid horizon is then scored from those first-hit indices.  Certification
    at horizon N means: for every lattice target with norm <= radius, the
    Wilson lower bound (at ``confidence``) of the hit-by-N probability is at
    least 1/2.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if radius < 0:
        raise ParameterError("radius must be >= 0")
    if horizon_start < 1 or horizon_cap < horizon_start:
        raise ParameterError("need 1 <= horizon_start <= horizon_cap")
    grid = _doubling_grid(horizon_start, horizon_cap)
    # Analytic size guard first: the disk holds ~pi*r^2 lattice points, so do
    # not even enumerate it when it cannot fit the budget.
    if math.pi * radius * radius > 2 * target_budget:
        target_count = -1
    else:
        target_count = len(_disk_targets(radius))
    if target_count < 0 or target_count > target_budget:
        count = target_count if target_count >= 0 else math.ceil(math.pi * radius**2)
        return N0Estimate(
            status="inconclusive",
            n0=horizon_cap,
            pair=pair,
            radius=radius,
            confidence=confidence,
            trials=trials,
            master_seed=master_seed,
            grid=tuple(grid),
            target_count=count,
            evaluated_targets=0,
            worst_lb=0.0,
            worst_target=None,
            per_target_lb=None,
            reason=f"target disk holds ~{count} lattice points, beyond the "
            f"budget of {target_budget}; certification not attempted",
        )

    targets = _disk_targets(radius)
    period = pair.period
    pattern = np.array(pair.pattern(), dtype=np.int64)
    steps = np.tile(pattern, horizon_cap)
    nsteps = period * horizon_cap
    enc_mult = 4 * (radius + int(steps.sum()) + 1)
    if int(steps.sum()) * enc_mult >= (1 << 62):
        raise ParameterError(
            "horizon cap too large for the 64-bit position encoding; "
            "lower horizon_cap"
        )
    enc_targets = np.array(sorted(t[0] * enc_mult + t[1] for t in targets), dtype=np.int64)
    order = sorted(range(len(targets)), key=lambda i: targets[i][0] * enc_mult + targets[i][1])
    targets_sorted = [targets[i] for i in order]
    grid_arr = np.array(grid, dtype=np.int64)

    def run_chunk(chunk: range) -> np.ndarray:
        # successes[t, g]: trials in this chunk hitting target t by grid[g] periods
        successes = np.zeros((len(targets_sorted), len(grid)), dtype=np.int64)
        for trial in chunk:
            codes = _rng.direction_codes(master_seed, trial, nsteps)
            dx = steps * ((codes == 0).astype(np.int64) - (codes == 1).astype(np.int64))
            dy = steps * ((codes == 2).astype(np.int64) - (codes == 3).astype(np.int64))
            xs = np.cumsum(dx)[period - 1 :: period]
            ys = np.cumsum(dy)[period - 1 :: period]
            enc = xs * enc_mult + ys
            uniq, first_idx = np.unique(enc, return_index=True)
            pos = np.searchsorted(uniq, enc_targets)
            pos_clam = np.minimum(pos, len(uniq) - 1)
            found = uniq[pos_clam] == enc_targets
            first_period = np.where(found, first_idx[pos_clam] + 1, nsteps + 1)
            successes += first_period[:, None] <= grid_arr[None, :]
        return successes

    successes = _rng.map_trial_chunks(
        trials, run_chunk, lambda parts: sum(parts), workers=workers
    )

    def lb(s: int) -> float:
        return wilson_interval(int(s), trials, confidence).low

    chosen: int | None = None
    for g, horizon in enumerate(grid):
        worst_s = int(successes[:, g].min())
        if lb(worst_s) >= 0.5:
            chosen = horizon
            chosen_g = g
            break

    final_g = chosen_g if chosen is not None else len(grid) - 1
    worst_idx = int(np.argmin(successes[:, final_g]))
    per_target = None
    if len(targets_sorted) <= per_target_report_cap:
        per_target = tuple(
            (t, lb(int(successes[i, final_g]))) for i, t in enumerate(targets_sorted)
        )
    return N0Estimate(
        status="certified" if chosen is not None else "inconclusive",
        n0=chosen if chosen is not None else horizon_cap,
        pair=pair,
        radius=radius,
        confidence=confidence,
        trials=trials,
        master_seed=master_seed,
        grid=tuple(grid),
        target_count=len(targets_sorted),
        evaluated_targets=len(targets_sorted),
        worst_lb=lb(int(successes[worst_idx, final_g])),
        worst_target=targets_sorted[worst_idx],
        per_target_lb=per_target,
        reason=None if chosen is not None else "horizon cap reached before certification",
    )


# ---------------------------------------------------------------------------
# Plan assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundPlan:
    index: int
    pair: BezoutPair
    n0: int
    n_start: int  # last index of the previous round (steps of this round are n_start+1..n_end)
    n_end: int
    radius: int
    alpha: int
    estimate: N0Estimate | None = None

    @property
    def segment_length(self) -> int:
        return self.n_end - self.n_start

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "pair": [self.pair.b1, self.pair.b2, self.pair.c1, self.pair.c2],
            "n0": self.n0,
            "n_start": self.n_start,
            "n_end": self.n_end,
            "radius": self.radius,
            "alpha": self.alpha,
            "estimate": None if self.estimate is None else self.estimate.to_json_dict(),
        }


@dataclass(frozen=True)
class ConstructionPlan:
    """The full recursive schedule; regenerates its step sequence bit-exactly."""

    rounds: tuple[RoundPlan, ...]
    status: str  # "certified" iff every round's N0 search certified
    master_seed: object
    confidence: float
    trials: int
    radius_mode: str

    @property
    def n_end(self) -> int:
        return self.rounds[-1].n_end if self.rounds else 0

    def sequence(self) -> StepSequence:
        rounds = self.rounds

        def evaluate(n: int) -> int:
            for rp in rounds:
                if n <= rp.n_end:
                    offset = n - rp.n_start - 1
                    return rp.pair.pattern()[offset % rp.pair.period]
            raise ParameterError(
                f"index {n} is beyond the constructed prefix (length {self.n_end})"
            )

        def runs():
            for rp in rounds:
                for _ in range(rp.n0):
                    yield rp.pair.b1, rp.pair.c1
                    yield rp.pair.b2, rp.pair.c2

        return StepSequence(
            "from-construction-plan",
            {"plan": self.to_json_dict()},
            evaluate,
            length=self.n_end,
            runs=runs,
        )

    def to_json_dict(self) -> dict:
        return {
            "rounds": [r.to_json_dict() for r in self.rounds],
            "status": self.status,
            "master_seed": list(self.master_seed)
            if isinstance(self.master_seed, tuple)
            else self.master_seed,
            "confidence": self.confidence,
            "trials": self.trials,
            "radius_mode": self.radius_mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConstructionPlan":
        rounds = []
        for r in data["rounds"]:
            b1, b2, c1, c2 = r["pair"]
            est = r.get("estimate")
            rounds.append(
                RoundPlan(
                    index=r["index"],
                    pair=BezoutPair(b1, b2, c1, c2),
                    n0=r["n0"],
                    n_start=r["n_start"],
                    n_end=r["n_end"],
                    radius=r["radius"],
                    alpha=r["alpha"],
                    estimate=None
                    if est is None
                    else N0Estimate(
                        status=est["status"],
                        n0=est["n0"],
                        pair=BezoutPair(*est["pair"]),
                        radius=est["radius"],
                        confidence=est["confidence"],
                        trials=est["trials"],
                        master_seed=tuple(est["master_seed"])
                        if isinstance(est["master_seed"], list)
                        else est["master_seed"],
                        grid=tuple(est["grid"]),
                        target_count=est["target_count"],
                        evaluated_targets=est["evaluated_targets"],
                        worst_lb=est["worst_lb"],
                        worst_target=tuple(est["worst_target"])
                        if est["worst_target"]
                        else None,
                        per_target_lb=None
                        if est["per_target_lb"] is None
                        else tuple((tuple(t), lb) for t, lb in est["per_target_lb"]),
                        reason=est["reason"],
                    ),
                )
            )
        return cls(
            rounds=tuple(rounds),
            status=data["status"],
            master_seed=tuple(data["master_seed"])
            if isinstance(data["master_seed"], list)
            else data["master_seed"],
            confidence=data["confidence"],
            trials=data["trials"],
            radius_mode=data["radius_mode"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ConstructionPlan":
        return cls.from_json_dict(json.loads(text))


def _realized_radius(plan_rounds: list[RoundPlan], n_k: int, master_seed, trials: int) -> int:
    """Largest observed |S_{n_k}| over simulated prefixes (the trajectory-based
    alternative to the coarse alpha*n bound)."""
    if n_k == 0:
        return 0
    values = np.concatenate(
        [np.tile(np.array(rp.pair.pattern(), dtype=np.int64), rp.n0) for rp in plan_rounds]
    )
    assert len(values) == n_k
    worst = 0
    for t in range(trials):
        # substream tag 102: realized-radius probes for round len(plan_rounds)
        codes = _rng.direction_codes((master_seed, 102, len(plan_rounds)), t, n_k)
        dx = values * ((codes == 0).astype(np.int64) - (codes == 1).astype(np.int64))
        dy = values * ((codes == 2).astype(np.int64) - (codes == 3).astype(np.int64))
        x = int(dx.sum())
        y = int(dy.sum())
        worst = max(worst, math.isqrt(x * x + y * y) + 1)
    return worst


def build_recurrent_sequence(
    prefix: GoodSetPrefix,
    rounds: int,
    *,
    master_seed=0,
    trials: int = 1000,
    confidence: float = 0.95,
    horizon_start: int = 16,
    horizon_cap: int = 1 << 14,
    target_budget: int = 20_000,
    radius_mode: str = "coarse",
    radius_trials: int = 64,
    workers: int = 1,
) -> tuple[ConstructionPlan, StepSequence]:
    """Assemble ``rounds`` rounds of the schedule and the resulting sequence.

    Round k starts at index n_k with the walk no farther than C from the
    origin, where C is alpha_k * n_k (coarse mode, alpha_k the largest value
    emitted so far) or the largest simulated |S_{n_k}| (realized mode).  The
    round's N0 search runs against that radius; its pattern is then emitted
    N0 times.  Every pair of elements is consumed exactly once, so any finite
    run uses each element finitely many times.  The plan is only marked
    certified when every round certified.
    """
    if rounds < 0:
        raise ParameterError("rounds must be >= 0")
    if radius_mode not in ("coarse", "realized"):
        raise ParameterError("radius_mode must be 'coarse' or 'realized'")
    plan_rounds: list[RoundPlan] = []
    n = 0
    alpha = 0
    for k in range(rounds):
        b1, b2 = pick_pair(prefix)
        pair = positive_bezout(b1, b2)
        if radius_mode == "coarse":
            radius = alpha * n
        else:
            radius = _realized_radius(plan_rounds, n, master_seed, radius_trials)
        # substream tag 101: the round-k horizon search
        est = estimate_N0(
            pair,
            radius,
            confidence=confidence,
            trials=trials,
            master_seed=(master_seed, 101, k),
            horizon_start=horizon_start,
            horizon_cap=horizon_cap,
            target_budget=target_budget,
            workers=workers,
        )
        n0 = est.n0
        n_end = n + pair.period * n0
        plan_rounds.append(
            RoundPlan(
                index=k,
                pair=pair,
                n0=n0,
                n_start=n,
                n_end=n_end,
                radius=radius,
                alpha=alpha,
                estimate=est,
            )
        )
        alpha = max(alpha, b1, b2)
        n = n_end
    status = (
        "certified"
        if plan_rounds and all(r.estimate and r.estimate.certified for r in plan_rounds)
        else ("empty" if not plan_rounds else "inconclusive")
    )
    plan = ConstructionPlan(
        rounds=tuple(plan_rounds),
        status=status,
        master_seed=master_seed,
        confidence=confidence,
        trials=trials,
        radius_mode=radius_mode,
    )
    return plan, plan.sequence()


# ---------------------------------------------------------------------------
# Plan evaluation: fresh walks against the per-round return guarantee
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundHitReport:
    index: int
    successes: int
    fraction: float
    wilson_lb: float


@dataclass(frozen=True)
class PlanEvaluation:
    """Fractions of fresh walks hitting the origin inside each round's segment."""

    trials: int
    master_seed: object
    level: float
    per_round: tuple[RoundHitReport, ...]

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "master_seed": list(self.master_seed)
            if isinstance(self.master_seed, tuple)
            else self.master_seed,
            "level": self.level,
            "per_round": [
                {
                    "index": r.index,
                    "successes": r.successes,
                    "fraction": r.fraction,
                    "wilson_lb": r.wilson_lb,
                }
                for r in self.per_round
            ],
            "rng_id": _rng.RNG_ID,
            "seed_rule": _rng.SEED_RULE_ID,
        }


def evaluate_plan(
    plan: ConstructionPlan,
    trials: int,
    master_seed,
    *,
    level: float = 0.95,
    workers: int = 1,
) -> PlanEvaluation:
    """Simulate fresh walks over the whole constructed prefix and count, per
    round, the walks with S_n = 0 for some n in (n_start, n_end]."""
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    if not plan.rounds:
        raise ParameterError("plan has no rounds to evaluate")
    values = np.concatenate(
        [np.tile(np.array(rp.pair.pattern(), dtype=np.int64), rp.n0) for rp in plan.rounds]
    )
    n_end = plan.n_end
    assert len(values) == n_end
    bounds = [(rp.n_start, rp.n_end) for rp in plan.rounds]

    def run_chunk(chunk: range) -> np.ndarray:
        hits = np.zeros(len(bounds), dtype=np.int64)
        for t in chunk:
            codes = _rng.direction_codes(master_seed, t, n_end)
            dx = values * ((codes == 0).astype(np.int64) - (codes == 1).astype(np.int64))
            dy = values * ((codes == 2).astype(np.int64) - (codes == 3).astype(np.int64))
            xs = np.cumsum(dx)
            ys = np.cumsum(dy)
            zero = (xs == 0) & (ys == 0)
            for i, (lo, hi) in enumerate(bounds):
                if bool(zero[lo:hi].any()):
                    hits[i] += 1
        return hits

    totals = _rng.map_trial_chunks(trials, run_chunk, lambda parts: sum(parts), workers=workers)
    per_round = tuple(
        RoundHitReport(
            index=plan.rounds[i].index,
            successes=int(totals[i]),
            fraction=int(totals[i]) / trials,
            wilson_lb=wilson_interval(int(totals[i]), trials, level).low,
        )
        for i in range(len(bounds))
    )
    return PlanEvaluation(
        trials=trials, master_seed=master_seed, level=level, per_round=per_round
    )


def composite_step_law(pair: BezoutPair, *, support_budget: int | None = None):
    """Exact law of one composite step (one period of the pattern), from the
    exact module; used to confirm the four unit displacements are reachable."""
    from . import exact

    kwargs = {} if support_budget is None else {"support_budget": support_budget}
    return exact.pmf_2d(pair.pattern(), **kwargs)
