"""Deterministic step-size sequences and their structural analyses.

A ``StepSequence`` is a pure rule ``n -> a_n`` (n >= 1, a_n > 0) from one of a
few named families, plus the machinery this package needs around such rules:
run-length decomposition of non-decreasing integer prefixes, extraction of
doubling subsequences, approximate-monotonicity reports, and the doubly
exponential block sequence whose sub-block lengths are powers ``2**(2**e)``.

Integer families always return exact ints; the real-power family returns
exact dyadic rationals at a declared precision.  Evaluation is pure: the same
index always yields the same value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .errors import (
    DecompositionError,
    OverflowRefusal,
    ParameterError,
    PreconditionError,
)

Number = int | Fraction

FAMILIES = (
    "constant",
    "floor-power",
    "real-power",
    "explicit-block",
    "from-construction-plan",
    "explicit-list",
)

#: Exponent-bit budget for materializing block-sequence lengths 2**(2**e):
#: 2**e may not exceed this many bits.  The default covers blocks k <= 4.
DEFAULT_EXPONENT_BIT_BUDGET = 1 << 21


def integer_nth_root(x: int, q: int) -> int:
    """Largest r with r**q <= x, for x >= 0, q >= 1."""
    if x < 0 or q < 1:
        raise ParameterError("integer_nth_root requires x >= 0 and q >= 1")
    if q == 1 or x in (0, 1):
        return x
    if q == 2:
        return math.isqrt(x)
    r = 1 << -(-x.bit_length() // q)  # upper-ish starting point
    while True:
        nr = ((q - 1) * r + x // r ** (q - 1)) // q
        if nr >= r:
            break
        r = nr
    while r**q > x:
        r -= 1
    return r


def _fraction_param(value, name: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParameterError(f"{name} must be a rational number, got {value!r}") from exc


class StepSequence:
    """A pure evaluator ``n -> a_n`` with a named family and exact parameters."""

    def __init__(
        self,
        kind: str,
        params: dict,
        evaluate: Callable[[int], Number],
        length: int | None = None,
        runs: Callable[[], Iterator[tuple[Number, int]]] | None = None,
    ):
        self.kind = kind
        self.params = params
        self._evaluate = evaluate
        self.length = length  # None means unbounded
        self._runs = runs

    def value(self, n: int) -> Number:
        if n < 1:
            raise ParameterError("sequence indices start at 1")
        if self.length is not None and n > self.length:
            raise ParameterError(
                f"index {n} is beyond this sequence's length {self.length}"
            )
        return self._evaluate(n)

    __call__ = value

    def prefix(self, n: int) -> list[Number]:
        return [self.value(i) for i in range(1, n + 1)]

    def iter_runs(self) -> Iterator[tuple[Number, int]]:
        """Yield (value, run length) pairs in order, where available."""
        if self._runs is None:
            raise ParameterError(f"family {self.kind!r} has no run iterator")
        return self._runs()

    def to_config(self) -> dict:
        """Serializable description: family name plus exact parameters."""
        return {"family": self.kind, "params": _encode_params(self.params)}

    def __repr__(self) -> str:
        return f"StepSequence(kind={self.kind!r}, params={self.params!r})"


def _encode_value(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, (list, tuple)):
        return [_encode_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _encode_value(x) for k, x in v.items()}
    return v


def _encode_params(params: dict) -> dict:
    return {k: _encode_value(v) for k, v in params.items()}


def _decode_number(v) -> Number:
    if isinstance(v, str):
        f = Fraction(v)
        return f.numerator if f.denominator == 1 else f
    if isinstance(v, int):
        return v
    raise ParameterError(f"expected an int or 'p/q' string, got {v!r}")


def make_sequence(family: str, **params) -> StepSequence:
    """Build a step sequence from a family name and exact parameters.

    Families and parameters:

    * ``constant``: value (> 0)
    * ``floor-power``: gamma (rational > 0), a_n = floor(n**gamma), exact ints
    * ``real-power``: alpha (rational in (0, 1]), precision_bits (default 64),
      a_n = the dyadic floor of n**alpha with denominator 2**precision_bits
    * ``explicit-list``: values (nonempty, all > 0)
    * ``explicit-block``: scale ("exact" or "scaled"), growth (optional
      callable for scaled mode), see :func:`explicit_block_sequence`
    * ``from-construction-plan``: plan (a construction plan or its dict form)
    """
    if family == "constant":
        c = _fraction_param(params.get("value", 1), "value")
        if c <= 0:
            raise ParameterError("constant value must be > 0")
        cv: Number = c.numerator if c.denominator == 1 else c
        return StepSequence("constant", {"value": cv}, lambda n: cv)

    if family == "floor-power":
        gamma = _fraction_param(params.get("gamma"), "gamma")
        if gamma <= 0:
            raise ParameterError("gamma must be > 0")
        p, q = gamma.numerator, gamma.denominator

        def floor_power(n: int) -> int:
            return integer_nth_root(n**p, q)

        return StepSequence("floor-power", {"gamma": gamma}, floor_power)

    if family == "real-power":
        alpha = _fraction_param(params.get("alpha"), "alpha")
        if not 0 < alpha <= 1:
            raise ParameterError("alpha must lie in (0, 1]")
        bits = params.get("precision_bits", 64)
        if not isinstance(bits, int) or bits < 1:
            raise ParameterError("precision_bits must be a positive int")
        p, q = alpha.numerator, alpha.denominator

        def real_power(n: int) -> Fraction:
            # floor(n**(p/q) * 2**bits) = floor((n**p << bits*q) ** (1/q))
            r = integer_nth_root(n**p << (bits * q), q)
            return Fraction(r, 1 << bits)

        return StepSequence(
            "real-power", {"alpha": alpha, "precision_bits": bits}, real_power
        )

    if family == "explicit-list":
        raw = params.get("values")
        if not raw:
            raise ParameterError("explicit-list requires a nonempty values list")
        vals: list[Number] = []
        for i, v in enumerate(raw):
            f = Fraction(v)
            if f <= 0:
                raise ParameterError(f"values[{i}] must be > 0, got {v}")
            vals.append(f.numerator if f.denominator == 1 else f)
        tup = tuple(vals)

        def runs() -> Iterator[tuple[Number, int]]:
            i = 0
            while i < len(tup):
                j = i
                while j < len(tup) and tup[j] == tup[i]:
                    j += 1
                yield tup[i], j - i
                i = j

        return StepSequence(
            "explicit-list",
            {"values": list(tup)},
            lambda n: tup[n - 1],
            length=len(tup),
            runs=runs,
        )

    if family == "explicit-block":
        return explicit_block_sequence(
            scale=params.get("scale", "exact"),
            growth=params.get("growth"),
            exponent_bit_budget=params.get(
                "exponent_bit_budget", DEFAULT_EXPONENT_BIT_BUDGET
            ),
            require_squared_growth=params.get("require_squared_growth", False),
        )

    if family == "from-construction-plan":
        # Imported lazily: the construction module builds on this one.
        from .construction import ConstructionPlan

        plan = params.get("plan")
        if isinstance(plan, dict):
            plan = ConstructionPlan.from_json_dict(plan)
        if not isinstance(plan, ConstructionPlan):
            raise ParameterError("plan must be a ConstructionPlan or its dict form")
        return plan.sequence()

    raise ParameterError(f"unknown sequence family {family!r}; expected one of {FAMILIES}")


def sequence_from_config(config: dict) -> StepSequence:
    """Inverse of ``StepSequence.to_config``."""
    if set(config) - {"family", "params"}:
        unknown = sorted(set(config) - {"family", "params"})
        raise ParameterError(f"unknown sequence-config keys: {unknown}")
    family = config.get("family")
    params = dict(config.get("params", {}))
    if family in ("constant",):
        if "value" in params:
            params["value"] = _decode_number(params["value"])
    elif family == "floor-power":
        if "gamma" in params:
            params["gamma"] = _decode_number(params["gamma"])
    elif family == "real-power":
        if "alpha" in params:
            params["alpha"] = _decode_number(params["alpha"])
    elif family == "explicit-list":
        params["values"] = [_decode_number(v) for v in params.get("values", [])]
    return make_sequence(family, **params)


def load_explicit_list(path) -> StepSequence:
    """Read a one-value-per-line text file into an explicit-list sequence."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln in fh:
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            values.append(_decode_number(ln))
    return make_sequence("explicit-list", values=values)


# ---------------------------------------------------------------------------
# Run-length decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunLengthDecomposition:
    """Non-decreasing integer prefix as strictly increasing values with counts.

    ``starts[j]`` is the 1-based index of the first occurrence of
    ``values[j]``; ``starts[j+1] - starts[j] == multiplicities[j]``.
    """

    values: tuple[int, ...]
    multiplicities: tuple[int, ...]
    starts: tuple[int, ...]

    def expand(self) -> list[int]:
        out: list[int] = []
        for v, m in zip(self.values, self.multiplicities):
            out.extend([v] * m)
        return out

    @property
    def prefix_length(self) -> int:
        return sum(self.multiplicities)


def run_length_decompose(seq: StepSequence, n: int) -> RunLengthDecomposition:
    """Decompose the first ``n`` values, which must be non-decreasing integers."""
    if n < 1:
        raise ParameterError("prefix length must be >= 1")
    values: list[int] = []
    mult: list[int] = []
    starts: list[int] = []
    prev: int | None = None
    for i in range(1, n + 1):
        a = seq.value(i)
        if isinstance(a, Fraction):
            if a.denominator != 1:
                raise DecompositionError(
                    f"value at index {i} is not an integer: {a}", index=i
                )
            a = a.numerator
        if prev is not None and a < prev:
            raise DecompositionError(
                f"prefix is not non-decreasing at index {i}: {a} < {prev}", index=i
            )
        if a != prev:
            values.append(a)
            mult.append(1)
            starts.append(i)
            prev = a
        else:
            mult[-1] += 1
    return RunLengthDecomposition(tuple(values), tuple(mult), tuple(starts))


# ---------------------------------------------------------------------------
# Doubling subsequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DoublingCertificate:
    """Indices i_1 < ... < i_K ending at n with a_{i_{k+1}} >= 2 a_{i_k}.

    ``ratio`` is K / log2(a_n): an exact Fraction when a_n is a power of two,
    a float otherwise, and None when a_n == 1 (log2 a_n == 0).
    """

    indices: tuple[int, ...]
    gap_bound: Fraction
    ratio: Fraction | float | None

    @property
    def size(self) -> int:
        return len(self.indices)

    def verify(self, seq: StepSequence) -> bool:
        vals = [Fraction(seq.value(i)) for i in self.indices]
        return all(vals[k + 1] >= 2 * vals[k] for k in range(len(vals) - 1))


def _log2_ratio(k: int, a_n: Fraction) -> Fraction | float | None:
    if a_n == 1:
        return None
    if a_n.denominator == 1:
        v = a_n.numerator
        if v & (v - 1) == 0:
            return Fraction(k, v.bit_length() - 1)
    return k / math.log2(a_n)


def extract_doubling_subsequence(
    seq: StepSequence, n: int, gap_bound=None
) -> DoublingCertificate:
    """Greedy backward extraction of a doubling subsequence ending at ``n``.

    Starting from index n, repeatedly pick the largest earlier index whose
    value lies in ``(v/2 - C, v/2]`` where ``v`` is the current value and
    ``C`` bounds consecutive gaps; stop when the window is empty.  Choosing
    the largest candidate is a deterministic tie-break; any candidate gives a
    valid certificate.

    ``gap_bound`` (C) is measured from the prefix when not supplied.  If it is
    supplied, the prefix must actually satisfy ``|a_{m+1} - a_m| <= C``.
    Sequences that never double produce the trivial certificate ``(n,)``.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    vals = [Fraction(seq.value(i)) for i in range(1, n + 1)]
    for i, v in enumerate(vals):
        if v < 1:
            raise PreconditionError(f"a_{i + 1} = {v} < 1; extraction requires a_m >= 1")
    measured = max(
        (abs(vals[i + 1] - vals[i]) for i in range(n - 1)), default=Fraction(0)
    )
    if gap_bound is None:
        C = measured
    else:
        C = Fraction(gap_bound)
        if C < 0:
            raise ParameterError("gap bound C must be >= 0")
        if measured > C:
            raise PreconditionError(
                f"prefix has a consecutive gap {measured} exceeding the supplied bound {C}"
            )
    picked = [n]
    cur = vals[n - 1]
    while True:
        lo = cur / 2 - C
        hi = cur / 2
        nxt = None
        for j in range(picked[-1] - 1, 0, -1):  # largest candidate below the current index
            if lo < vals[j - 1] <= hi:
                nxt = j
                break
        if nxt is None:
            break
        picked.append(nxt)
        cur = vals[nxt - 1]
    indices = tuple(reversed(picked))
    return DoublingCertificate(
        indices=indices,
        gap_bound=C,
        ratio=_log2_ratio(len(indices), vals[n - 1]),
    )


# ---------------------------------------------------------------------------
# Approximate monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    """Exhaustive (r, s) check over a finite window.

    A violation is a pair (n, m) with m >= r*n and a_n > s*a_m.  ``clean_from``
    is the smallest index from which no violation starts inside the window
    (1 when there are none, None when the last index still violates).
    """

    r: Fraction
    s: Fraction
    horizon: int
    violations: tuple[tuple[int, int], ...]
    ok: bool
    clean_from: int | None


def check_rs_monotone(seq: StepSequence, r, s, n_max: int) -> MonotonicityReport:
    """Check ``a_n <= s * a_m`` for all 1 <= n <= n_max and m >= r*n in range."""
    rf, sf = Fraction(r), Fraction(s)
    if rf < 1 or sf < 1:
        raise ParameterError("r and s must both be >= 1")
    if n_max < 2:
        raise ParameterError("n_max must be >= 2")
    vals = [Fraction(seq.value(i)) for i in range(1, n_max + 1)]
    # suffix minima let most indices pass in O(1)
    sufmin: list[Fraction] = list(vals)
    for i in range(n_max - 2, -1, -1):
        if sufmin[i + 1] < sufmin[i]:
            sufmin[i] = sufmin[i + 1]
    violations: list[tuple[int, int]] = []
    for n in range(1, n_max + 1):
        m0 = math.ceil(rf * n)
        if m0 > n_max:
            break
        if vals[n - 1] <= sf * sufmin[m0 - 1]:
            continue
        for m in range(m0, n_max + 1):
            if vals[n - 1] > sf * vals[m - 1]:
                violations.append((n, m))
    if not violations:
        clean_from: int | None = 1
    else:
        worst = max(n for n, _ in violations)
        clean_from = worst + 1 if worst < n_max else None
    return MonotonicityReport(
        r=rf,
        s=sf,
        horizon=n_max,
        violations=tuple(violations),
        ok=not violations,
        clean_from=clean_from,
    )


# ---------------------------------------------------------------------------
# The doubly exponential block sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubBlockLength:
    """Length of sub-block (k, i), exact as the pair base**exponent = 2**(2**e).

    ``value`` is the materialized integer when the length fits the configured
    width, else None; ``materialize`` raises instead of silently widening.
    """

    k: int
    i: int
    e: int
    base: int
    exponent: int
    materializable: bool
    value: int | None

    def materialize(self) -> int:
        if self.value is None:
            raise OverflowRefusal(
                f"sub-block length 2**{self.exponent} does not fit the configured width",
                exponent=self.exponent,
            )
        return self.value


def sub_block_length(k: int, i: int, *, max_bits: int = 64) -> SubBlockLength:
    """Exact length of sub-block (k, i): 2**(2**(k*k + i - 1))."""
    if k < 1 or not 1 <= i <= k:
        raise ParameterError("require k >= 1 and 1 <= i <= k")
    e = k * k + i - 1
    exponent = 1 << e
    materializable = exponent <= max_bits
    return SubBlockLength(
        k=k,
        i=i,
        e=e,
        base=2,
        exponent=exponent,
        materializable=materializable,
        value=(1 << exponent) if materializable else None,
    )


def default_scaled_growth(k: int, i: int) -> int:
    """Growth surrogate 2**(k*k + i - 1): the exact lengths' exponents' sizes."""
    return 1 << (k * k + i - 1)


@dataclass(frozen=True)
class BlockSpec:
    """Layout of sub-block (k, i): its length and trailing run, in one mode."""

    k: int
    i: int
    e: int
    length: int  # materialized (exact mode: 2**(2**e), guarded by the budget)
    tail: int  # 3*k*k copies of k-1 after the main run, absent in the last sub-block
    mode: str  # "exact" | "scaled"


def _exact_length(k: int, i: int, exponent_bit_budget: int) -> int:
    e = k * k + i - 1
    exponent = 1 << e
    if exponent > exponent_bit_budget:
        raise OverflowRefusal(
            f"block ({k},{i}) has length 2**{exponent}, beyond the "
            f"{exponent_bit_budget}-bit materialization budget",
            exponent=exponent,
        )
    return 1 << exponent


def explicit_block_sequence(
    scale: str = "exact",
    growth: Callable[[int, int], int] | None = None,
    *,
    exponent_bit_budget: int = DEFAULT_EXPONENT_BIT_BUDGET,
    require_squared_growth: bool = False,
) -> StepSequence:
    """The block sequence: block k holds k sub-blocks, sub-block i being
    ``L(k, i)`` copies of k followed (for i < k) by ``3*k*k`` copies of k-1.

    In exact mode ``L(k, i) = 2**(2**(k*k + i - 1))``; positional queries are
    honoured while the needed lengths fit the exponent-bit budget and refused
    beyond it.  In scaled mode a growth function replaces L (default
    ``2**(k*k + i - 1)``); it must be strictly increasing along the (k, i)
    order, and with ``require_squared_growth`` it must also satisfy
    ``g(k, i+1) >= g(k, i)**2`` wherever it is materialized.
    """
    if scale not in ("exact", "scaled"):
        raise ParameterError("scale must be 'exact' or 'scaled'")
    if scale == "exact":
        if growth is not None:
            raise ParameterError("growth is only meaningful in scaled mode")
        length_of = lambda k, i: _exact_length(k, i, exponent_bit_budget)  # noqa: E731
        params = {"scale": "exact"}
    else:
        g = growth or default_scaled_growth

        def length_of(k: int, i: int) -> int:
            L = g(k, i)
            if not isinstance(L, int) or L < 1:
                raise ParameterError(f"growth({k},{i}) must be a positive int, got {L!r}")
            return L

        params = {
            "scale": "scaled",
            "growth": "default-pow2" if growth is None else "custom",
        }

    def runs() -> Iterator[tuple[int, int]]:
        k = 1
        prev: tuple[tuple[int, int], int] | None = None
        while True:
            for i in range(1, k + 1):
                L = length_of(k, i)
                if scale == "scaled" and prev is not None:
                    if L <= prev[1]:
                        raise ParameterError(
                            f"growth must be strictly increasing: "
                            f"g{prev[0]}={prev[1]} but g({k},{i})={L}"
                        )
                    if require_squared_growth and prev[0] == (k, i - 1) and L < prev[1] ** 2:
                        raise ParameterError(
                            f"growth({k},{i})={L} is below the square of "
                            f"growth({k},{i - 1})={prev[1]}"
                        )
                prev = ((k, i), L)
                yield k, L
                if i < k:
                    yield k - 1, 3 * k * k
            k += 1

    def evaluate(n: int) -> int:
        pos = 0
        for value, L in runs():
            pos += L
            if n <= pos:
                return value
        raise AssertionError("unreachable")

    return StepSequence("explicit-block", params, evaluate, runs=runs)


def block_boundaries(k_max: int, *, scale: str = "exact", growth=None,
                     exponent_bit_budget: int = DEFAULT_EXPONENT_BIT_BUDGET) -> dict:
    """Exact boundary indices for blocks 1..k_max.

    Returns ``{"block_end": {k: n_k}, "sub_block_end": {(k, j): n_kj}}`` where
    indices point at the last element of the block or sub-block.
    """
    seq = explicit_block_sequence(
        scale=scale, growth=growth, exponent_bit_budget=exponent_bit_budget
    )
    block_end: dict[int, int] = {}
    sub_end: dict[tuple[int, int], int] = {}
    pos = 0
    k = 1
    run_iter = seq.iter_runs()
    while k <= k_max:
        for i in range(1, k + 1):
            value, L = next(run_iter)
            assert value == k
            pos += L
            if i < k:
                value, tail = next(run_iter)
                assert value == k - 1
                pos += tail
            sub_end[(k, i)] = pos
        block_end[k] = pos
        k += 1
    return {"block_end": block_end, "sub_block_end": sub_end}
