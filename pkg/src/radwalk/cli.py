"""Command-line front end.

Each subcommand binds one library operation to flags, an optional JSON config
file (flags override file values; unknown keys are rejected), seeded streams,
and exportable reports.  Outputs are byte-stable for identical inputs and
seeds: no timestamps, sorted keys, and a versioned metadata header.

Exit codes: 0 success, 1 execution error (bad input, I/O), 2 a verification
check failed, 3 a search ended inconclusive (for example a horizon cap was
reached before certification).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import construction as _construction
from . import exact as _exact
from . import sequences as _sequences
from . import verify as _verify
from . import walk as _walk
from .errors import RadwalkError, ParameterError
from .rng import RNG_ID, SEED_RULE_ID

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2
EXIT_INCONCLUSIVE = 3

REPORT_VERSION = 1


@dataclass
class RunConfig:
    """A fully validated run: one subcommand plus its arguments."""

    command: str
    args: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, "args": dict(self.args)}

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        extra = set(data) - {"command", "args"}
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(command=data["command"], args=dict(data.get("args", {})))


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError as exc:
        raise ParameterError(f"expected a comma-separated integer list, got {text!r}") from exc


def _number_list(text: str) -> list:
    out = []
    for p in text.split(","):
        p = p.strip()
        if not p:
            continue
        f = Fraction(p)
        out.append(f.numerator if f.denominator == 1 else f)
    if not out:
        raise ParameterError("expected a nonempty comma-separated list")
    return out


def _point(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ParameterError(f"expected a point 'x,y', got {text!r}")
    return int(parts[0]), int(parts[1])


def _sequence_from_args(args: dict) -> _sequences.StepSequence:
    spec = args.get("seq")
    path = args.get("seq_file")
    lst = args.get("seq_list")
    given = [v for v in (spec, path, lst) if v]
    if len(given) != 1:
        raise ParameterError("exactly one of --seq, --seq-file, --seq-list is required")
    if spec:
        try:
            config = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"--seq must be a JSON object: {exc}") from exc
        return _sequences.sequence_from_config(config)
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            return _sequences.sequence_from_config(json.load(fh))
    return _sequences.load_explicit_list(lst)


# ---------------------------------------------------------------------------
# Argument declaration (one entry per subcommand; used for parser and for
# config-file key validation)
# ---------------------------------------------------------------------------

_SEQ_FLAGS = [
    ("--seq", {"help": "sequence config as inline JSON"}),
    ("--seq-file", {"help": "path to a sequence config JSON file"}),
    ("--seq-list", {"help": "path to a one-value-per-line explicit list"}),
]

_COMMANDS: dict[str, list[tuple[str, dict]]] = {
    "simulate": _SEQ_FLAGS
    + [
        ("--n", {"type": int, "required": True, "help": "horizon (steps)"}),
        ("--seed", {"type": int, "default": 0}),
        ("--trial", {"type": int, "default": 0}),
        ("--record", {"action": "store_true", "help": "also export the trajectory CSV"}),
        ("--width-bits", {"type": int, "default": 63}),
        ("--promote", {"action": "store_true", "help": "grow past the width instead of failing"}),
    ],
    "mc-return": _SEQ_FLAGS
    + [
        ("--n", {"type": int, "required": True}),
        ("--trials", {"type": int, "required": True}),
        ("--seed", {"type": int, "default": 0}),
        ("--target", {"default": "0,0"}),
        ("--level", {"type": float, "default": 0.95}),
    ],
    "exact.pmf1d": [("--d", {"required": True, "help": "steps, comma separated"})],
    "exact.pmf2d": [("--a", {"required": True})],
    "exact.mod": [
        ("--d", {"required": True}),
        ("--m", {"type": int, "required": True}),
        ("--residue", {"type": int, "default": 0}),
        ("--method", {"default": "auto", "choices": ["auto", "residue", "full"]}),
    ],
    "exact.interval": [
        ("--d", {"required": True}),
        ("--half-width", {"required": True, "help": "window half width D"}),
    ],
    "exact.hit": [
        ("--a", {"required": True}),
        ("--target", {"default": "0,0"}),
        ("--horizon", {"type": int, "required": True}),
    ],
    "sequence.make": _SEQ_FLAGS + [("--n", {"type": int, "default": 16})],
    "sequence.decompose": _SEQ_FLAGS + [("--n", {"type": int, "required": True})],
    "sequence.doubling": _SEQ_FLAGS
    + [
        ("--n", {"type": int, "required": True}),
        ("--gap-bound", {"default": None}),
    ],
    "sequence.monotone": _SEQ_FLAGS
    + [
        ("--r", {"default": "1"}),
        ("--s", {"default": "1"}),
        ("--n-max", {"type": int, "required": True}),
    ],
    "sequence.blocks": [
        ("--k", {"type": int, "required": True}),
        ("--i", {"type": int, "required": True}),
        ("--max-bits", {"type": int, "default": 64}),
    ],
    "construct.bezout": [
        ("--b1", {"type": int, "required": True}),
        ("--b2", {"type": int, "required": True}),
    ],
    "construct.n0": [
        ("--b1", {"type": int, "required": True}),
        ("--b2", {"type": int, "required": True}),
        ("--radius", {"type": int, "default": 0}),
        ("--trials", {"type": int, "default": 400}),
        ("--seed", {"type": int, "default": 0}),
        ("--confidence", {"type": float, "default": 0.95}),
        ("--horizon-start", {"type": int, "default": 16}),
        ("--horizon-cap", {"type": int, "default": 1 << 14}),
    ],
    "construct.build": [
        ("--good-set", {"default": None, "help": "elements, comma separated"}),
        ("--good-set-file", {"default": None}),
        ("--rounds", {"type": int, "required": True}),
        ("--trials", {"type": int, "default": 400}),
        ("--seed", {"type": int, "default": 0}),
        ("--confidence", {"type": float, "default": 0.95}),
        ("--horizon-cap", {"type": int, "default": 1 << 14}),
        ("--radius-mode", {"default": "coarse", "choices": ["coarse", "realized"]}),
        ("--evaluate-trials", {"type": int, "default": 0}),
    ],
    "construct.check-good": [
        ("--good-set", {"default": None}),
        ("--good-set-file", {"default": None}),
        ("--horizon", {"type": int, "default": None}),
    ],
    "verify.supermartingale": [("--radius", {"type": int, "required": True})],
    "verify.elo": [
        ("--d", {"required": True}),
        ("--half-width", {"required": True}),
    ],
    "verify.modlemma": [
        ("--d", {"required": True}),
        ("--m", {"type": int, "required": True}),
        ("--cap", {"type": float, "default": 10.0}),
    ],
    "verify.hitting": [
        ("--r", {"type": float, "required": True}),
        ("--step", {"type": int, "default": 1}),
        ("--trials", {"type": int, "default": 10_000}),
        ("--seed", {"type": int, "default": 0}),
        ("--floor", {"type": float, "default": 0.15}),
        ("--start-mode", {"default": "axis", "choices": ["axis", "ring"]}),
    ],
    "verify.suppmf": [
        ("--k-max", {"type": int, "required": True}),
        ("--k-floor", {"type": int, "default": 8}),
        ("--ratio-cap", {"type": float, "default": 2.0}),
        ("--slope-cap", {"type": float, "default": 0.1}),
    ],
}

_GLOBAL_FLAGS = [
    ("--out", {"default": None, "help": "output path base (writes <out>.json / <out>.csv)"}),
    ("--format", {"default": "structured", "choices": ["structured", "csv", "both"]}),
    ("--workers", {"type": int, "default": 1}),
    ("--config", {"default": None, "help": "JSON config file; flags override its args"}),
]


def _dest(flag: str) -> str:
    return flag.lstrip("-").replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radwalk",
        description="Planar Rademacher-walk toolkit: simulation, exact oracles, checks.",
    )
    groups = parser.add_subparsers(dest="group", required=True)
    tree: dict[str, list[str]] = {}
    for cmd in _COMMANDS:
        g, _, sub = cmd.partition(".")
        tree.setdefault(g, []).append(sub)
    for g, subs in tree.items():
        gp = groups.add_parser(g, help=f"{g} operations")
        if subs == [""]:
            _add_flags(gp, _COMMANDS[g])
            gp.set_defaults(command=g)
        else:
            sp = gp.add_subparsers(dest="sub", required=True)
            for sub in subs:
                cmd = f"{g}.{sub}"
                p = sp.add_parser(sub, help=f"{cmd} operation")
                _add_flags(p, _COMMANDS[cmd])
                p.set_defaults(command=cmd)
    return parser


def _add_flags(parser: argparse.ArgumentParser, flags: list[tuple[str, dict]]) -> None:
    for flag, kw in flags + _GLOBAL_FLAGS:
        kw = dict(kw)
        required = kw.pop("required", False)
        kw.pop("default", None)
        # Defaults are applied after the config-file merge so that only
        # explicitly passed flags override file values.
        parser.add_argument(flag, **kw, default=argparse.SUPPRESS)
        parser.set_defaults(**{f"__required_{_dest(flag)}": required})


def _defaults_for(command: str) -> dict:
    out = {}
    for flag, kw in _COMMANDS[command] + _GLOBAL_FLAGS:
        if "default" in kw:
            out[_dest(flag)] = kw["default"]
        elif kw.get("action") == "store_true":
            out[_dest(flag)] = False
    return out


def parse_config(argv: list[str]) -> RunConfig:
    """Parse flags (and an optional config file) into a validated RunConfig."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    ns.pop("group", None)
    ns.pop("sub", None)
    required = {k[11:] for k, v in ns.items() if k.startswith("__required_") and v}
    explicit = {k: v for k, v in ns.items() if not k.startswith("__required_")}
    args = _defaults_for(command)
    known = set(_defaults_for(command)) | {
        _dest(f) for f, _ in _COMMANDS[command] + _GLOBAL_FLAGS
    }
    config_path = explicit.pop("config", None) or args.get("config")
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        file_cfg = RunConfig.from_dict(data)
        if file_cfg.command != command:
            raise ParameterError(
                f"config file is for {file_cfg.command!r}, not {command!r}"
            )
        unknown = set(file_cfg.args) - known
        if unknown:
            raise ParameterError(f"unknown keys in config file: {sorted(unknown)}")
        args.update(file_cfg.args)
    args.update(explicit)
    args.pop("config", None)
    missing = sorted(k for k in required if args.get(k) is None)
    if missing:
        flags = ", ".join("--" + k.replace("_", "-") for k in missing)
        raise ParameterError(f"missing required arguments: {flags}")
    return RunConfig(command=command, args=args)


# ---------------------------------------------------------------------------
# Handlers: each returns (status, record, rows, columns)
# ---------------------------------------------------------------------------


def _handle_simulate(a: dict):
    seq = _sequence_from_args(a)
    policy = _walk.PositionPolicy(width_bits=a["width_bits"], promote=a["promote"])
    if a["record"]:
        summary, rec = _walk.simulate_recording(
            seq, a["n"], a["seed"], trial=a["trial"], policy=policy
        )
        rows = [
            {"n": r[0], "x": str(r[1]), "y": str(r[2]), "a_n": str(r[3]), "kappa": r[4], "eps": r[5]}
            for r in rec.rows
        ]
    else:
        summary = _walk.simulate(seq, a["n"], a["seed"], trial=a["trial"], policy=policy)
        rows = []
    record = summary.to_json_dict()
    record["sequence"] = seq.to_config()
    return EXIT_OK, record, rows, ["n", "x", "y", "a_n", "kappa", "eps"]


def _handle_mc_return(a: dict):
    seq = _sequence_from_args(a)
    est = _walk.monte_carlo_return(
        seq,
        a["n"],
        a["trials"],
        a["seed"],
        _point(a["target"]),
        level=a["level"],
        workers=a["workers"],
    )
    rec = est.to_json_dict()
    row = {
        "trials": est.trials,
        "successes": est.successes,
        "estimate": est.estimate,
        "ci_low": est.ci.low,
        "ci_high": est.ci.high,
    }
    return EXIT_OK, rec, [row], list(row)


def _pmf_rows_1d(p: _exact.ExactPmf1D):
    rows = []
    for v, w in zip(p.values, p.weights):
        m = Fraction(w, p.total)
        rows.append({"value": str(v), "mass": f"{m.numerator}/{m.denominator}"})
    return rows


def _handle_exact(command: str, a: dict):
    if command == "exact.pmf1d":
        p = _exact.pmf_1d(_number_list(a["d"]))
        rec = {"steps": [str(s) for s in p.steps], "support_size": len(p.values),
               "pmf": {str(v): str(m) for v, m in p.as_dict().items()}}
        return EXIT_OK, rec, _pmf_rows_1d(p), ["value", "mass"]
    if command == "exact.pmf2d":
        p = _exact.pmf_2d(_number_list(a["a"]))
        rows = [
            {"x": str(x), "y": str(y), "mass": str(Fraction(w, p.total))}
            for (x, y), w in zip(p.points, p.weights)
        ]
        rec = {"steps": [str(s) for s in p.steps], "support_size": len(p.points),
               "pmf": {f"{x},{y}": str(Fraction(w, p.total)) for (x, y), w in zip(p.points, p.weights)}}
        return EXIT_OK, rec, rows, ["x", "y", "mass"]
    if command == "exact.mod":
        prob = _exact.mod_probability(
            _number_list(a["d"]), a["m"], a["residue"], method=a["method"]
        )
        rec = {"m": a["m"], "residue": a["residue"], "probability": str(prob),
               "probability_float": float(prob), "method": a["method"]}
        return EXIT_OK, rec, [rec], list(rec)
    if command == "exact.interval":
        sup, x = _exact.max_interval_probability(
            _number_list(a["d"]), Fraction(a["half_width"])
        )
        rec = {"sup": str(sup), "sup_float": float(sup), "argmax_x": str(x),
               "half_width": a["half_width"]}
        return EXIT_OK, rec, [rec], list(rec)
    if command == "exact.hit":
        prob = _exact.hit_probability_2d(
            _number_list(a["a"]), _point(a["target"]), a["horizon"]
        )
        rec = {"target": a["target"], "horizon": a["horizon"],
               "probability": str(prob), "probability_float": float(prob)}
        return EXIT_OK, rec, [rec], list(rec)
    raise AssertionError(command)


def _handle_sequence(command: str, a: dict):
    if command == "sequence.blocks":
        sb = _sequences.sub_block_length(a["k"], a["i"], max_bits=a["max_bits"])
        rec = {
            "k": sb.k, "i": sb.i, "e": sb.e, "base": sb.base,
            "exponent": sb.exponent, "materializable": sb.materializable,
            "value": sb.value,
        }
        return EXIT_OK, rec, [rec], list(rec)
    seq = _sequence_from_args(a)
    if command == "sequence.make":
        prefix = seq.prefix(a["n"])
        rec = {"config": seq.to_config(), "prefix": [str(v) for v in prefix]}
        rows = [{"n": i + 1, "a_n": str(v)} for i, v in enumerate(prefix)]
        return EXIT_OK, rec, rows, ["n", "a_n"]
    if command == "sequence.decompose":
        d = _sequences.run_length_decompose(seq, a["n"])
        rows = [
            {"block": j + 1, "value": v, "multiplicity": m, "start": s}
            for j, (v, m, s) in enumerate(zip(d.values, d.multiplicities, d.starts))
        ]
        rec = {"values": list(d.values), "multiplicities": list(d.multiplicities),
               "starts": list(d.starts)}
        return EXIT_OK, rec, rows, ["block", "value", "multiplicity", "start"]
    if command == "sequence.doubling":
        gap = a.get("gap_bound")
        cert = _sequences.extract_doubling_subsequence(
            seq, a["n"], None if gap in (None, "") else Fraction(gap)
        )
        rec = {
            "indices": list(cert.indices),
            "size": cert.size,
            "gap_bound": str(cert.gap_bound),
            "ratio": None if cert.ratio is None else str(cert.ratio),
        }
        rows = [{"position": i + 1, "index": idx} for i, idx in enumerate(cert.indices)]
        return EXIT_OK, rec, rows, ["position", "index"]
    if command == "sequence.monotone":
        rep = _sequences.check_rs_monotone(seq, Fraction(a["r"]), Fraction(a["s"]), a["n_max"])
        rec = {
            "r": str(rep.r), "s": str(rep.s), "horizon": rep.horizon,
            "ok": rep.ok, "clean_from": rep.clean_from,
            "violations": [list(v) for v in rep.violations],
        }
        rows = [{"n": n, "m": m} for n, m in rep.violations]
        return EXIT_OK, rec, rows, ["n", "m"]
    raise AssertionError(command)


def _good_set_from_args(a: dict) -> _construction.GoodSetPrefix:
    if a.get("good_set"):
        return _construction.GoodSetPrefix(_int_list(a["good_set"]))
    if a.get("good_set_file"):
        return _construction.GoodSetPrefix.from_file(a["good_set_file"])
    raise ParameterError("one of --good-set or --good-set-file is required")


def _handle_construct(command: str, a: dict):
    if command == "construct.bezout":
        pair = _construction.positive_bezout(a["b1"], a["b2"])
        rec = {"b1": pair.b1, "b2": pair.b2, "c1": pair.c1, "c2": pair.c2,
               "period": pair.period, "pattern": pair.pattern()}
        return EXIT_OK, rec, [rec], ["b1", "b2", "c1", "c2", "period"]
    if command == "construct.n0":
        pair = _construction.positive_bezout(a["b1"], a["b2"])
        est = _construction.estimate_N0(
            pair,
            a["radius"],
            confidence=a["confidence"],
            trials=a["trials"],
            master_seed=a["seed"],
            horizon_start=a["horizon_start"],
            horizon_cap=a["horizon_cap"],
            workers=a["workers"],
        )
        rec = est.to_json_dict()
        status = EXIT_OK if est.certified else EXIT_INCONCLUSIVE
        row = {"status": est.status, "n0": est.n0, "worst_lb": est.worst_lb,
               "targets": est.target_count}
        return status, rec, [row], list(row)
    if command == "construct.build":
        prefix = _good_set_from_args(a)
        plan, _seq = _construction.build_recurrent_sequence(
            prefix,
            a["rounds"],
            master_seed=a["seed"],
            trials=a["trials"],
            confidence=a["confidence"],
            horizon_cap=a["horizon_cap"],
            radius_mode=a["radius_mode"],
            workers=a["workers"],
        )
        rec = plan.to_json_dict()
        if a["evaluate_trials"]:
            ev = _construction.evaluate_plan(
                plan, a["evaluate_trials"], (a["seed"], 201), workers=a["workers"]
            )
            rec["evaluation"] = ev.to_json_dict()
        rows = [
            {"round": r.index, "b1": r.pair.b1, "b2": r.pair.b2, "n0": r.n0,
             "n_start": r.n_start, "n_end": r.n_end,
             "status": r.estimate.status if r.estimate else "none"}
            for r in plan.rounds
        ]
        status = EXIT_OK if plan.status == "certified" else EXIT_INCONCLUSIVE
        return status, rec, rows, ["round", "b1", "b2", "n0", "n_start", "n_end", "status"]
    if command == "construct.check-good":
        prefix = _good_set_from_args(a)
        rep = _construction.check_good_set(prefix, a.get("horizon"))
        rows = [
            {"element": e, "partners": c, "flagged": e in rep.flagged}
            for e, c in zip(rep.elements, rep.partner_counts)
        ]
        rec = {"elements": list(rep.elements), "partner_counts": list(rep.partner_counts),
               "flagged": list(rep.flagged), "ok": rep.ok}
        status = EXIT_OK if rep.ok else EXIT_VERIFY_FAILED
        return status, rec, rows, ["element", "partners", "flagged"]
    raise AssertionError(command)


def _handle_verify(command: str, a: dict):
    if command == "verify.supermartingale":
        rep = _verify.verify_supermartingale(a["radius"])
        rec = rep.to_json_dict()
        row = {"radius": rep.radius, "points": rep.points, "max_delta": rep.max_delta,
               "max_agreement_gap": rep.max_agreement_gap, "passed": rep.passed}
        return (EXIT_OK if rep.passed else EXIT_VERIFY_FAILED), rec, [row], list(row)
    if command == "verify.elo":
        cmp_ = _verify.verify_elo(_number_list(a["d"]), Fraction(a["half_width"]))
        rec = cmp_.to_json_dict()
        row = {"exact": str(cmp_.exact), "bound": cmp_.bound, "passed": cmp_.passed}
        return (EXIT_OK if cmp_.passed else EXIT_VERIFY_FAILED), rec, [row], list(row)
    if command == "verify.modlemma":
        rep = _verify.verify_mod_lemma(_number_list(a["d"]), a["m"], cap=a["cap"])
        rec = rep.to_json_dict()
        row = {"k": rep.k, "m": rep.m, "sup": str(rep.sup), "ratio": rep.ratio,
               "passed": rep.passed}
        ok = rep.passed is None or rep.passed
        return (EXIT_OK if ok else EXIT_VERIFY_FAILED), rec, [row], list(row)
    if command == "verify.hitting":
        res = _verify.hitting_time_experiment(
            a["r"], a["step"], a["trials"], a["seed"], workers=a["workers"],
            start_mode=a["start_mode"],
        )
        rec = res.to_json_dict()
        rec["floor"] = a["floor"]
        passed = res.ci.low > a["floor"]
        rec["passed"] = passed
        row = {"r": res.r, "horizon": res.horizon, "estimate": res.estimate,
               "ci_low": res.ci.low, "passed": passed}
        return (EXIT_OK if passed else EXIT_VERIFY_FAILED), rec, [row], list(row)
    if command == "verify.suppmf":
        rep = _verify.sup_pmf_trend(
            a["k_max"], k_floor=a["k_floor"], ratio_cap=a["ratio_cap"],
            slope_cap=a["slope_cap"],
        )
        rec = rep.to_json_dict()
        rows = [{"k": r.k, "sup": str(r.sup), "ratio": r.ratio} for r in rep.rows]
        return (EXIT_OK if rep.passed else EXIT_VERIFY_FAILED), rec, rows, ["k", "sup", "ratio"]
    raise AssertionError(command)


_DISPATCH = {
    "simulate": lambda a: _handle_simulate(a),
    "mc-return": lambda a: _handle_mc_return(a),
}


def _dispatch(config: RunConfig):
    cmd = config.command
    if cmd in _DISPATCH:
        return _DISPATCH[cmd](config.args)
    group = cmd.split(".", 1)[0]
    if group == "exact":
        return _handle_exact(cmd, config.args)
    if group == "sequence":
        return _handle_sequence(cmd, config.args)
    if group == "construct":
        return _handle_construct(cmd, config.args)
    if group == "verify":
        return _handle_verify(cmd, config.args)
    raise ParameterError(f"unknown command {cmd!r}")


def emit_report(
    command: str,
    record: dict,
    rows: list[dict],
    columns: list[str],
    out: str | None,
    fmt: str,
    status: int,
) -> dict:
    """Write the structured and/or CSV report; returns the full document.

    The data sections are byte-stable for identical inputs and seeds; the
    metadata header carries the report version and static stream identifiers.
    """
    document = {
        "meta": {
            "format": "radwalk-report",
            "version": REPORT_VERSION,
            "command": command,
            "rng_id": RNG_ID,
            "seed_rule": SEED_RULE_ID,
        },
        "status": {0: "ok", 2: "verification-failed", 3: "inconclusive"}.get(status, "error"),
        "record": record,
    }
    if out:
        base = Path(out)
        base.parent.mkdir(parents=True, exist_ok=True)
        if fmt in ("structured", "both"):
            base.with_suffix(".json").write_text(
                json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
        if fmt in ("csv", "both"):
            lines = [f"# radwalk-report v{REPORT_VERSION} command={command}"]
            lines.append(",".join(columns))
            for row in rows:
                lines.append(",".join(str(row.get(c, "")) for c in columns))
            base.with_suffix(".csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return document


def run(config: RunConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    args = dict(config.args)
    out = args.get("out")
    fmt = args.get("format", "structured")
    args.setdefault("workers", 1)
    status, record, rows, columns = _dispatch(RunConfig(config.command, args))
    document = emit_report(config.command, record, rows, columns, out, fmt, status)
    if not out:
        json.dump(document, sys.stdout, sort_keys=True, indent=2)
        sys.stdout.write("\n")
    return status


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
        return run(config)
    except RadwalkError as exc:
        print(f"radwalk: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"radwalk: i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
