"""Command-line front end.

Subcommands::

    artifact roots TYPE [RANK] [--mult M]
    artifact spectrum --config space.toml --bound R
    artifact wave     --config space.toml --bound R
    artifact rank     --config space.toml [--bound R]
    artifact clu      --config space.toml --bound R
    artifact classh   --config space.toml
    artifact so3 [table|clean|wave0|conj|support] --alpha a --A b [...]
    artifact verify closure|monodromy|conj|enum [...]

A space config is TOML::

    # optional flat torus, listed first in every vector
    [torus]
    dim = 1
    gram = [[1]]

    # one block per simple factor, in order
    [[factor]]
    type = "A"            # root system label: A B C D BC E6 E7 E8 F4 G2
    rank = 1
    kind = "group"        # group | typeI | maximal_rank
    gamma = ["L1"]        # central classes quotiented out in this factor
    scale = "1/4"         # metric scale of this factor
    # mult = 2 or mult = {short = 2, long = 4}   (typeI only)

    # optional diagonal subgroup: one entry per factor (torus entry first
    # when a torus is present)
    [gamma]
    product_generators = [["L1", "e1"]]

Reports are JSON with sorted keys, exact values as strings and 12-digit
float renderings.  Exit status: 0 success, 2 configuration error, 3 numeric
guard failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, oracle, so3nat, symspec
from .exact import SurdScalar, fmt_rational, fmt_vec, frac
from .lattice import LatticeError, enumerate_coefficients
from .rootsys import RootSystemError, build_root_system, root_datum
from .so3nat import SO3Error, SO3Metric
from .symspec import Factor, MetricSpec, SpaceError, SymmetricSpaceSpec

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


# -- configuration -----------------------------------------------------------------

def _rational_text(x) -> str:
    if isinstance(x, float):
        raise ConfigError(f"floats are not accepted for exact values ({x}); write \"p/q\"")
    return fmt_rational(frac(x))


def normalize_config(raw: dict) -> dict:
    """Canonical dictionary form of a space config (this is what reports echo)."""
    unknown = set(raw) - {"torus", "factor", "gamma"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    out: dict[str, Any] = {}
    torus = raw.get("torus")
    dim = 0
    if torus:
        dim = int(torus.get("dim", 0))
        gram = torus.get("gram")
        if gram is None:
            gram = [[1 if i == j else 0 for j in range(dim)] for i in range(dim)]
        out["torus"] = {"dim": dim, "gram": [[_rational_text(x) for x in row] for row in gram]}
    factors = []
    for i, f in enumerate(raw.get("factor", [])):
        if "type" not in f:
            raise ConfigError(f"factor {i + 1}: missing 'type'")
        item = {
            "type": str(f["type"]),
            "rank": int(f["rank"]) if f.get("rank") is not None else None,
            "kind": str(f.get("kind", "group")),
            "gamma": [str(g) for g in f.get("gamma", [])],
            "scale": _rational_text(f.get("scale", 1)),
        }
        if "mult" in f:
            m = f["mult"]
            item["mult"] = int(m) if isinstance(m, int) else {str(k): int(v) for k, v in sorted(m.items())}
        unknown = set(f) - {"type", "rank", "kind", "gamma", "scale", "mult"}
        if unknown:
            raise ConfigError(f"factor {i + 1}: unknown keys {sorted(unknown)}")
        factors.append(item)
    out["factor"] = factors
    gens = (raw.get("gamma") or {}).get("product_generators", [])
    out["gamma"] = {"product_generators": [[str(x) for x in g] for g in gens]}
    return out


def build_space(config: dict) -> tuple[SymmetricSpaceSpec, MetricSpec]:
    config = normalize_config(config)
    factors = []
    for i, f in enumerate(config["factor"]):
        kind = f["kind"]
        if kind == "group":
            mult = 2
        elif kind == "maximal_rank":
            mult = 1
        elif kind == "typeI":
            if "mult" not in f:
                raise ConfigError(f"factor {i + 1}: typeI factors need 'mult'")
            mult = f["mult"]
        else:
            raise ConfigError(f"factor {i + 1}: unknown kind {kind!r}")
        try:
            rs = build_root_system(f["type"], f["rank"], mult)
            factors.append(Factor(kind, rs, tuple(f["gamma"])))
        except (RootSystemError, SpaceError, LatticeError) as exc:
            raise ConfigError(f"factor {i + 1}: {exc}") from exc
    torus = config.get("torus", {"dim": 0, "gram": []})
    gens = tuple(tuple(g) for g in config["gamma"]["product_generators"])
    space = SymmetricSpaceSpec(torus["dim"], tuple(factors), gens)
    metric = MetricSpec(torus["gram"], [f["scale"] for f in config["factor"]]).check(space)
    return space, metric


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return normalize_config(tomllib.load(fh))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# -- serialization -----------------------------------------------------------------

def envelope(command: str, inputs: dict, result: Any, notes: Sequence[str] = ()) -> dict:
    return {"tool": "artifact", "version": __version__, "command": command,
            "input": inputs, "result": result, "notes": list(notes)}


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(f"{prefix}.{k}" if prefix else str(k), obj[k], rows)
    elif isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        for i, x in enumerate(obj):
            _flatten(f"{prefix}[{i}]", x, rows)
    else:
        rows.append({"key": prefix, "value": json.dumps(obj, sort_keys=True)})


def to_csv(report: dict, table: list[dict] | None) -> str:
    buf = io.StringIO()
    if table is None:
        table = []
        _flatten("", report["result"], table)
    fields: list[str] = []
    for row in table:
        for k in row:
            if k not in fields:
                fields.append(k)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in table:
        writer.writerow({k: (v if isinstance(v, str) else "" if v is None else json.dumps(v))
                         for k, v in row.items()})
    return buf.getvalue()


def _num(x: float) -> float:
    return float(f"{x:.12g}")


# -- symmetric-space commands -----------------------------------------------------------

def cmd_roots(args) -> tuple[dict, dict, list | None]:
    rs = build_root_system(args.type, args.rank, args.mult)
    data = root_datum(rs)
    table = [{"functional": " ".join(r["functional"]), "positive": r["positive"], "orbit": r["orbit"],
              "mult": r["mult"]} for r in data["roots"]]
    return {"type": args.type, "rank": args.rank, "mult": args.mult}, data, table


def _space_inputs(args) -> tuple[dict, SymmetricSpaceSpec, MetricSpec]:
    config = load_config(args.config)
    space, metric = build_space(config)
    return config, space, metric


def cmd_spectrum(args):
    config, space, metric = _space_inputs(args)
    report = symspec.enumerate_spectrum(space, metric, frac(args.bound))
    result = {
        "dimension": space.dimension, "rank": space.rank, "bound": fmt_rational(report.bound),
        "class_count": report.class_count,
        "lengths": [{"len2": fmt_rational(r), "classes": [c.to_json() for c in report.classes[r]]}
                    for r in report.lengths],
    }
    table = [{"len2": fmt_rational(c.len2), "v": json.dumps(c.to_json()["v"]), "degsing": c.degsing,
              "dim_fix": c.dim_fix, "morse": c.morse, "morse_mod4": c.morse_mod4}
             for c in report.all_classes()]
    return {"config": config, "bound": args.bound}, result, table


def cmd_wave(args):
    config, space, metric = _space_inputs(args)
    report = symspec.enumerate_spectrum(space, metric, frac(args.bound))
    terms = symspec.wave_analysis(report)
    result = {"bound": fmt_rational(report.bound), "terms": [t.to_json() for t in terms]}
    table = [{"len2": fmt_rational(t.len2), "certified_nonzero": t.certified_nonzero} for t in terms]
    return {"config": config, "bound": args.bound}, result, table


def cmd_rank(args):
    config, space, metric = _space_inputs(args)
    bound = frac(args.bound) if args.bound else symspec.smallest_regular_len2(space, metric)
    report = symspec.enumerate_spectrum(space, metric, bound)
    rank = symspec.recover_rank(report, space.dimension)
    result = {"bound": fmt_rational(bound), "recovered_rank": rank, "true_rank": space.rank,
              "max_dim_fix": max(c.dim_fix for c in report.all_classes())}
    return {"config": config, "bound": args.bound}, result, None


def cmd_clu(args):
    config, space, metric = _space_inputs(args)
    report = symspec.enumerate_spectrum(space, metric, frac(args.bound))
    return {"config": config, "bound": args.bound}, symspec.clu_check(report).to_json(), None


def cmd_classh(args):
    config, space, _metric = _space_inputs(args)
    return {"config": config}, symspec.in_class_H(space).to_json(), None


# -- SO(3) commands ------------------------------------------------------------------------

def _so3_metric(args) -> SO3Metric:
    return SO3Metric(SurdScalar.of(args.alpha), SurdScalar.of(args.A))


def _so3_inputs(args, *extra) -> dict:
    out = {"alpha": args.alpha, "A": args.A}
    for name in extra:
        out[name] = getattr(args, name)
    return out


def cmd_so3(args):
    metric = _so3_metric(args)
    action = args.action or "table"
    if action == "table":
        periods = so3nat.length_spectrum(metric, SurdScalar.of(args.bound), morse=args.morse)
        result = {"metric": metric.to_json(), "cleanliness": so3nat.classify_cleanliness(metric).to_json(args.bound),
                  "periods": [p.to_json(metric) for p in periods]}
        table = [{"len2": p.to_json()["len2_coeff"]["exact"], "types": "".join(sorted(p.types_present)),
                  "clean": p.clean, "components": len(p.components)} for p in periods]
        return _so3_inputs(args, "bound", "morse"), result, table
    if action == "clean":
        verdict = so3nat.classify_cleanliness(metric)
        return _so3_inputs(args, "bound"), verdict.to_json(args.bound), None
    if action == "wave0":
        return _so3_inputs(args), so3nat.wave0_taumin(metric).to_json(), None
    if action == "support":
        return _so3_inputs(args, "bound"), so3nat.certified_singular_support(metric, args.bound).to_json(), None
    if action == "conj":
        if args.p is None or args.q is None:
            raise ConfigError("so3 conj needs --p and --q")
        len2 = so3nat.type3_len2(metric, args.p, args.q)
        up_to = SurdScalar.of(args.bound) if args.bound != "0" else len2
        times = so3nat.type3_conjugate_times(metric, args.p, args.q, up_to)
        result = {"sigma": so3nat._scalar_json(so3nat.sigma(metric, args.p, args.q)),
                  "a_squared": so3nat._scalar_json(so3nat.conjugate_frequency_squared(metric, args.p, args.q)),
                  "primitive_len2": so3nat._scalar_json(len2),
                  "up_to_len2": so3nat._scalar_json(up_to),
                  "times": [t.to_json() for t in times],
                  "morse_index": so3nat.type3_morse_index(metric, args.p, args.q)}
        return _so3_inputs(args, "p", "q", "bound"), result, [t.to_json() for t in times]
    raise ConfigError(f"unknown so3 action {action!r}")


# -- numeric verification -------------------------------------------------------------------

def so3_closure_audit(metric: SO3Metric, bound, rng: random.Random | None = None,
                      random_velocities: int = 4) -> dict:
    """Closure residuals at every predicted period and at midpoints between periods.

    At a period each component's representative velocity is flowed for the
    predicted length.  At midpoints every representative velocity seen in
    the table, plus a few random unit velocities, is checked for non-closure.
    """
    af, Af = float(metric.alpha), float(metric.A)
    inertia = oracle.Inertia(af, Af)
    periods = [p for p in so3nat.length_spectrum(metric, bound) if p.len2_coeff.sign() > 0]
    velocities: list[tuple[float, ...]] = [so3nat.type1_velocity(metric), so3nat.type2_velocity(metric)]
    rows = []
    for period in periods:
        length = math.sqrt(float(period.len2_coeff)) * oracle.ELL0
        for comp in period.components:
            if comp.type == "I":
                v = so3nat.type1_velocity(metric)
            elif comp.type == "II":
                v = so3nat.type2_velocity(metric)
            else:
                v = so3nat.type3_velocity(metric, *comp.pq)
            if v not in velocities:
                velocities.append(v)
            vv, ww = oracle.geodesic_pair(inertia, v)
            rows.append({"len2": so3nat._scalar_json(period.len2_coeff), "type": comp.type,
                         "residual": oracle.closure_residual(vv, ww, length)})
    rng = rng or random.Random(0)
    for _ in range(random_velocities):
        velocities.append(tuple(inertia.unit([rng.gauss(0, 1) for _ in range(3)])))
    gaps = []
    lengths = [0.0] + [math.sqrt(float(p.len2_coeff)) * oracle.ELL0 for p in periods]
    for lo, hi in zip(lengths, lengths[1:]):
        mid = 0.5 * (lo + hi)
        worst = min(oracle.closure_residual(*oracle.geodesic_pair(inertia, v), mid) for v in velocities)
        gaps.append({"length": mid, "min_residual": worst})
    return {
        "periods": [{**r, "residual": float(f"{r['residual']:.3e}")} for r in rows],
        "max_period_residual": max((r["residual"] for r in rows), default=0.0),
        "midpoints": [{"length": _num(g["length"]), "min_residual": float(f"{g['min_residual']:.3e}")}
                      for g in gaps],
        "min_midpoint_residual": min((g["min_residual"] for g in gaps), default=math.inf),
    }


def cmd_verify(args):
    what = args.what
    if what == "enum":
        gram = json.loads(args.gram)
        bound = frac(args.bound)
        fast = enumerate_coefficients(gram, bound, dedup=False)
        fast_set = sorted(tuple(int(a) for a in x) for x in fast)
        brute = oracle.brute_enumerate(gram, bound)
        order = list(range(len(brute)))
        random.Random(args.seed).shuffle(order)
        mismatch = [brute[i] for i in order if brute[i] not in set(fast_set)][:5]
        result = {"fincke_pohst": len(fast_set), "brute_force": len(brute),
                  "equal": fast_set == brute, "first_missing": [list(x) for x in mismatch]}
        return {"gram": args.gram, "bound": args.bound, "seed": args.seed}, result, None
    metric = _so3_metric(args)
    if what == "closure":
        audit = so3_closure_audit(metric, SurdScalar.of(args.bound), random.Random(args.seed))
        audit["max_period_residual"] = float(f"{audit['max_period_residual']:.3e}")
        audit["min_midpoint_residual"] = float(f"{audit['min_midpoint_residual']:.3e}")
        audit["tolerances"] = {"closure": oracle.CLOSURE_TOL, "non_closure": 1e-3}
        return _so3_inputs(args, "bound", "seed"), audit, audit["periods"]
    if what == "monodromy":
        r = SurdScalar.of(args.r)
        comps = so3nat.fix_components(metric, r)
        predicted = max(c.dim for c in comps) + 1
        if comps[0].type == "I":
            v = so3nat.type1_velocity(metric)
        elif comps[0].type == "II":
            v = so3nat.type2_velocity(metric)
        else:
            v = so3nat.type3_velocity(metric, *comps[0].pq)
        rep = oracle.monodromy_report((float(metric.alpha), float(metric.A)), v,
                                      math.sqrt(float(r)) * oracle.ELL0, args.tol)
        result = {"component_type": comps[0].type, "clean_prediction": predicted,
                  "period_clean": so3nat._period_is_clean(metric, r), **rep.to_json()}
        return _so3_inputs(args, "r", "tol"), result, None
    if what == "conj":
        if args.p is None or args.q is None:
            raise ConfigError("verify conj needs --p and --q")
        v = so3nat.type3_velocity(metric, args.p, args.q)
        length = math.sqrt(float(so3nat.type3_len2(metric, args.p, args.q))) * oracle.ELL0
        rep = oracle.conjugate_report((float(metric.alpha), float(metric.A)), v, length)
        exact_count = so3nat.type3_morse_index(metric, args.p, args.q)
        result = {"numeric": rep.to_json(), "exact_count": exact_count,
                  "agree": exact_count == rep.count, "length": _num(length)}
        return _so3_inputs(args, "p", "q"), result, None
    raise ConfigError(f"unknown verify target {what!r}")


# -- entry point -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="artifact", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="oracle sampling order only")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("roots", parents=[common], help="root datum of a root system")
    p.add_argument("type")
    p.add_argument("rank", nargs="?", type=int)
    p.add_argument("--mult", type=int, default=2)
    p.set_defaults(func=cmd_roots)

    for name, func, needs_bound in (("spectrum", cmd_spectrum, True), ("wave", cmd_wave, True),
                                    ("rank", cmd_rank, False), ("clu", cmd_clu, True),
                                    ("classh", cmd_classh, None)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--config", required=True)
        if needs_bound is not None:
            p.add_argument("--bound", required=needs_bound, default=None)
        p.set_defaults(func=func)

    p = sub.add_parser("so3", parents=[common], help="naturally reductive metrics on SO(3)")
    p.add_argument("action", nargs="?", choices=("table", "clean", "wave0", "conj", "support"))
    p.add_argument("--alpha", required=True)
    p.add_argument("--A", dest="A", required=True)
    p.add_argument("--bound", default="0")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--morse", choices=("exact", "numeric"))
    p.set_defaults(func=cmd_so3)

    p = sub.add_parser("verify", parents=[common], help="numeric oracles")
    p.add_argument("what", choices=("closure", "monodromy", "conj", "enum"))
    p.add_argument("--alpha", default="1")
    p.add_argument("--A", dest="A", default="1")
    p.add_argument("--bound", default="4")
    p.add_argument("--r", default=None)
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--tol", type=float, default=oracle.EIGEN_TOL)
    p.add_argument("--gram", default="[[1,0],[0,1]]")
    p.set_defaults(func=cmd_verify)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify" and args.what == "monodromy" and args.r is None:
            raise ConfigError("verify monodromy needs --r")
        inputs, result, table = args.func(args)
        report = envelope(args.command, inputs, result)
        text = dumps(report) if args.format == "json" else to_csv(report, table)
    except oracle.NumericGuardError as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        if exc.report:
            print(json.dumps(exc.report, sort_keys=True, default=str), file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, SpaceError, RootSystemError, LatticeError, SO3Error, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
