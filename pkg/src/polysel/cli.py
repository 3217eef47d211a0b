"""Command-line interface.

Subcommands: select, prior-table, count, predict, simulate.  Exit codes:
0 success, 2 malformed data, 3 infeasible configuration, 4 cap exceeded.
stdout carries data only; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import __version__
from . import terms as tm
from .estimators import (
    frequency,
    model_average_predict,
    renormalize,
    report_dict,
    summarize,
    tvd,
)
from .marginals import Dataset, GPriorEvaluator, load_csv
from .priors import HyperScheme, PriorFamily, PriorSpec, log_prior, prior_table
from .sampler import SamplerConfig, run
from .simulate import (
    Allocation,
    SimDesign,
    TRUE_MODEL_QUAD5,
    median_summary,
    selection_experiment,
    theorem1_experiment,
    theorem2_experiment,
)
from .space import CapExceeded, Heredity, Model, ModelSpace

EXIT_OK = 0
EXIT_DATA = 2
EXIT_CONFIG = 3
EXIT_CAP = 4


class ConfigError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"polysel: {msg}", file=sys.stderr)


def read_config(path: str) -> dict[str, str]:
    """Flat key=value file; blank lines and # comments ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _merge(args: argparse.Namespace, keys: dict[str, type]) -> dict:
    """Config-file values overridden by explicitly given CLI flags."""
    cfg: dict = {}
    if getattr(args, "config", None):
        raw = read_config(args.config)
        for key, value in raw.items():
            name = key.replace("-", "_")
            if name not in keys:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[name] = _coerce(value, keys[name], key)
    for name in keys:
        flag = getattr(args, name, None)
        if flag is not None:
            cfg[name] = flag
    return cfg


def _coerce(value: str, typ, key: str):
    try:
        if typ is bool:
            return value.lower() in ("1", "true", "yes", "on")
        return typ(value)
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot parse {value!r}") from None


def _heredity(text: str) -> Heredity:
    try:
        return Heredity(text.lower())
    except ValueError:
        raise ConfigError(f"heredity must be 'strong' or 'weak', got {text!r}") from None


def _space_from(p: int, degree: int, heredity: Heredity, base: str | None) -> ModelSpace:
    base_terms = [tm.intercept(p)]
    if base:
        base_terms += [tm.parse_term(s, p) for s in base.split(",") if s.strip()]
    return ModelSpace.full_surface(p, degree, heredity, base=base_terms)


def _metadata(cfg: dict) -> dict:
    return {
        "version": __version__,
        "config": {k: (v.value if hasattr(v, "value") else v) for k, v in cfg.items()},
    }


# ---------------------------------------------------------------- select


_SELECT_KEYS = {
    "data": str,
    "response": str,
    "degree": int,
    "heredity": str,
    "base": str,
    "prior": str,
    "iterations": int,
    "seed": int,
    "g": float,
    "lambda_": float,
    "weights": str,
    "top_k": int,
    "center": bool,
    "scale": bool,
    "out": str,
    "trace": str,
}


def cmd_select(args: argparse.Namespace) -> int:
    try:
        cfg = _merge(args, _SELECT_KEYS)
        for key in ("data", "response"):
            if key not in cfg:
                raise ConfigError(f"missing required setting {key!r}")
        cfg.setdefault("degree", 2)
        cfg.setdefault("heredity", "strong")
        cfg.setdefault("prior", "hip.11")
        cfg.setdefault("iterations", 10_000)
        cfg.setdefault("seed", 0)
        cfg.setdefault("lambda_", 0.5)
        cfg.setdefault("weights", "0.5,0.4,0.1")
        cfg.setdefault("top_k", 10)
        heredity = _heredity(cfg["heredity"])
        spec = PriorSpec.parse(cfg["prior"])
        weights = tuple(float(w) for w in cfg["weights"].split(","))
        if cfg["iterations"] < 1:
            raise ConfigError("iterations must be >= 1")
        if cfg["degree"] < 1:
            raise ConfigError("degree must be >= 1")
    except (ConfigError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG

    try:
        dataset = load_csv(
            cfg["data"], cfg["response"], cfg.get("center", False), cfg.get("scale", False)
        )
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_DATA

    try:
        space = _space_from(dataset.p, cfg["degree"], heredity, cfg.get("base"))
        if dataset.n <= len(space.all_terms):
            raise ConfigError(
                f"n={dataset.n} is too small for a full model with "
                f"{len(space.all_terms)} terms"
            )
        sampler_cfg = SamplerConfig(
            iterations=cfg["iterations"],
            prior=spec,
            seed=cfg["seed"],
            kernel_weights=weights,
            posterior_weight=cfg["lambda_"],
        )
    except (ConfigError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG

    evaluator = GPriorEvaluator(g=cfg.get("g"))
    table, trace = run(
        dataset, space, sampler_cfg, evaluator, trace_path=cfg.get("trace")
    )
    summary = summarize(table, top_k=cfg["top_k"])
    accepted = sum(1 for *_ , acc in trace if acc)
    diagnostics = {
        "tvd_renorm_vs_freq": tvd(renormalize(table), frequency(table)),
        "acceptance_rate": accepted / len(trace),
        "n_evaluated": len(table),
    }
    report = {
        "metadata": {**_metadata(cfg), "seed": cfg["seed"]},
        "space": {
            "p": space.p,
            "degree": cfg["degree"],
            "heredity": heredity.value,
            "base": [tm.term_str(t) for t in space.base_terms],
            "response": cfg["response"],
            "columns": dataset.names,
        },
        "evaluator": {"method": "gprior-unit-info", "g": cfg.get("g")},
        "summary": report_dict(summary, space, diagnostics),
        "table": {
            "iterations": table.iterations,
            "entries": [
                [bits, lm, lp, visits] for bits, (lm, lp, visits) in table.items()
            ],
        },
    }
    text = json.dumps(report, indent=2)
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return EXIT_OK


# ---------------------------------------------------------------- prior-table


def cmd_prior_table(args: argparse.Namespace) -> int:
    try:
        heredity = _heredity(args.heredity)
        specs = []
        for fam in args.families.split(","):
            fam = fam.strip().lower()
            if fam == "epp":
                specs.append(PriorSpec(PriorFamily.EPP))
                continue
            for scheme in (HyperScheme.ALL_ONES, HyperScheme.CHILD_PENALTY):
                specs.append(PriorSpec(PriorFamily(fam), scheme))
        space = _space_from(args.p, args.degree, heredity, args.base)
    except (ConfigError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG
    try:
        models, probs = prior_table(space, specs, cap=args.cap)
    except CapExceeded as e:
        _err(str(e))
        return EXIT_CAP
    header = ["model"] + [s.label() for s in specs]
    rows = [
        ["+".join(m.term_strings())] + [f"{v:.12g}" for v in probs[r]]
        for r, m in enumerate(models)
    ]
    out = sys.stdout if not args.out else open(args.out, "w")
    try:
        if args.format == "csv":
            writer = csv.writer(out)
            writer.writerow(header)
            writer.writerows(rows)
        else:
            widths = [max(len(h), *(len(r[c]) for r in rows)) for c, h in enumerate(header)]
            print("  ".join(h.ljust(widths[c]) for c, h in enumerate(header)), file=out)
            for r in rows:
                print("  ".join(v.ljust(widths[c]) for c, v in enumerate(r)), file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------- count


def cmd_count(args: argparse.Namespace) -> int:
    try:
        heredity = _heredity(args.heredity)
        if args.p < 1 or args.degree < 1:
            raise ConfigError("need p >= 1 and degree >= 1")
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    try:
        space = ModelSpace.full_surface(args.p, args.degree, heredity)
        print(space.model_count(cap=args.cap))
    except CapExceeded:
        _err(
            f"space of p={args.p}, degree={args.degree} has more than {args.cap} "
            "models and no closed-form count; raise --cap to enumerate"
        )
        return EXIT_CAP
    except ValueError as e:
        _err(str(e))
        return EXIT_CONFIG
    return EXIT_OK


# ---------------------------------------------------------------- predict


def cmd_predict(args: argparse.Namespace) -> int:
    try:
        with open(args.artifact) as fh:
            artifact = json.load(fh)
        sp = artifact["space"]
        space = _space_from_descriptor(sp)
        table = _table_from_artifact(space, artifact["table"])
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as e:
        _err(f"cannot load artifact {args.artifact}: {e}")
        return EXIT_DATA
    try:
        training = load_csv(args.data, sp["response"])
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_DATA
    if training.names != sp["columns"]:
        _err("training data columns do not match the artifact")
        return EXIT_DATA
    try:
        new_mains, truth = _load_newdata(args.newdata, sp["columns"], sp["response"])
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_DATA
    k = min(args.top_k, len(table))
    evaluator = GPriorEvaluator(g=artifact.get("evaluator", {}).get("g"))
    yhat = model_average_predict(table, training, new_mains, k, evaluator)
    with open(args.out, "w") as fh:
        writer = csv.writer(fh)
        writer.writerow(["yhat"])
        for v in yhat:
            writer.writerow([f"{v:.10g}"])
    if truth is not None:
        prmse = math.sqrt(float(np.mean((truth - yhat) ** 2)))
        print(f"PRMSE={prmse:.6g}")
    return EXIT_OK


def _space_from_descriptor(sp: dict) -> ModelSpace:
    heredity = Heredity(sp["heredity"])
    base = [tm.parse_term(s, sp["p"]) for s in sp["base"]]
    return ModelSpace.full_surface(sp["p"], sp["degree"], heredity, base=base)


def _table_from_artifact(space: ModelSpace, data: dict):
    from .estimators import PosteriorTable

    table = PosteriorTable(space)
    for bits, lm, lp, visits in data["entries"]:
        table._entries[int(bits)] = [float(lm), float(lp), int(visits)]
    table.iterations = int(data["iterations"])
    if not table._entries:
        raise ValueError("artifact holds an empty posterior table")
    return table


def _load_newdata(path: str, columns: list[str], response: str):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        has_truth = response in header
        want = columns + ([response] if has_truth else [])
        if sorted(header) != sorted(want):
            raise ValueError(f"{path}: columns do not match the training data")
        idx = [header.index(c) for c in columns]
        yidx = header.index(response) if has_truth else None
        rows, truth = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: line {lineno}: wrong field count")
            try:
                rows.append([float(row[i]) for i in idx])
                if has_truth:
                    truth.append(float(row[yidx]))
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric value") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows), (np.asarray(truth) if has_truth else None)


# ---------------------------------------------------------------- simulate


_DESIGN_KEYS = {
    "preset": str,
    "p": int,
    "degree": int,
    "heredity": str,
    "true_terms": str,
    "n": int,
    "n_grid": str,
    "snr": float,
    "allocation": str,
    "replications": int,
    "seed": int,
    "iterations": int,
    "priors": str,
    "walk_prior": str,
    "beta": float,
}


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = read_config(args.design)
        design_cfg = {}
        for key, value in cfg.items():
            name = key.replace("-", "_")
            if name not in _DESIGN_KEYS:
                raise ConfigError(f"unknown design key {key!r}")
            design_cfg[name] = _coerce(value, _DESIGN_KEYS[name], key)
        rows, summary_rows, fieldnames = _run_design(design_cfg)
    except (OSError, ConfigError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows + summary_rows:
            writer.writerow(row)
    meta = {"version": __version__, "design": design_cfg}
    with open(args.out + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=2, default=str)
        fh.write("\n")
    return EXIT_OK


def _run_design(cfg: dict):
    preset = cfg.get("preset", "selection")
    seed = cfg.get("seed", 0)
    if preset == "theorem2":
        rows = theorem2_experiment(
            n=cfg.get("n", 10_000),
            beta=cfg.get("beta", 1.0),
            replications=cfg.get("replications", 20),
            seed=seed,
        )
        fields = ("mass_m1", "mass_m2", "combined")
        summary = median_summary(rows, by=(), fields=fields)
        return rows, summary, ["replication", *fields]

    allocation = Allocation(cfg.get("allocation", "equal"))
    if preset == "theorem1":
        space = _space_from(cfg.get("p", 2), cfg.get("degree", 2), Heredity.STRONG, None)
        true_terms = _parse_true_terms(cfg, space, default="x1,x2,x1*x2")
        design = SimDesign(
            n=10,
            snr=cfg.get("snr", 1.0),
            allocation=allocation,
            true_terms=true_terms,
            replications=cfg.get("replications", 20),
            seed=seed,
        )
        grid = [int(v) for v in cfg.get("n_grid", "100,500,2500,12500").split(",")]
        rows, _ = theorem1_experiment(space, design, grid)
        summary = median_summary(rows, by=("n",), fields=("prob_closure",))
        return rows, summary, ["n", "replication", "prob_closure"]

    if preset not in ("selection", "selection33"):
        raise ConfigError(f"unknown preset {cfg.get('preset')!r}")
    heredity = _heredity(cfg.get("heredity", "strong"))
    if preset == "selection33":
        space = ModelSpace.full_surface(5, 2, heredity)
        true_terms = TRUE_MODEL_QUAD5
    else:
        space = _space_from(cfg["p"], cfg.get("degree", 2), heredity, None)
        true_terms = _parse_true_terms(cfg, space, default=None)
        if true_terms is None:
            raise ConfigError("explicit designs need true_terms")
    design = SimDesign(
        n=cfg.get("n", 500),
        snr=cfg.get("snr", 1.0),
        allocation=allocation,
        true_terms=true_terms,
        replications=cfg.get("replications", 20),
        seed=seed,
    )
    priors = [PriorSpec.parse(s) for s in cfg.get("priors", "hip.ch,hop.ch,hup.ch").split(",")]
    walk = PriorSpec.parse(cfg.get("walk_prior", "hip.11"))
    rows = selection_experiment(
        space,
        design,
        priors,
        iterations=cfg.get("iterations", 10_000),
        walk_prior=walk,
    )
    fields = ("tp_rate", "fp_rate", "true_prob", "true_rank")
    summary = median_summary(rows, by=("prior", "n", "snr"), fields=fields)
    names = [
        "replication", "n", "snr", "allocation", "prior",
        "tp_rate", "fp_rate", "true_prob", "true_rank", "found",
    ]
    return rows, summary, names


def _parse_true_terms(cfg: dict, space: ModelSpace, default: str | None):
    text = cfg.get("true_terms", default)
    if text is None:
        return None
    return tuple(tm.parse_term(s, space.p) for s in text.split(",") if s.strip())


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polysel",
        description="Bayesian variable selection over heredity-constrained polynomial model spaces",
    )
    parser.add_argument("--version", action="version", version=f"polysel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("select", help="run the model-space sampler on a CSV dataset")
    ps.add_argument("--config", help="key=value config file; flags override")
    ps.add_argument("--data", help="training CSV (header row required)")
    ps.add_argument("--response", help="name of the response column")
    ps.add_argument("--degree", type=int, help="full-surface degree (default 2)")
    ps.add_argument("--heredity", choices=("strong", "weak"), help="heredity condition")
    ps.add_argument("--base", help="comma-separated base terms besides the intercept")
    ps.add_argument("--prior", help="prior spec such as hip.ch (default hip.11)")
    ps.add_argument("--iterations", type=int, help="chain length (default 10000)")
    ps.add_argument("--seed", type=int, help="RNG seed (default 0)")
    ps.add_argument("--g", type=float, help="g-prior scale (default n)")
    ps.add_argument("--lambda", dest="lambda_", type=float, help="posterior weight in proposals")
    ps.add_argument("--weights", help="kernel weights local,intermediate,global")
    ps.add_argument("--top-k", dest="top_k", type=int, help="models kept in the report")
    ps.add_argument("--center", action="store_const", const=True, help="center mains first")
    ps.add_argument("--scale", action="store_const", const=True, help="scale mains first")
    ps.add_argument("--trace", help="write an NDJSON trace here")
    ps.add_argument("--out", help="write the JSON report here (default stdout)")
    ps.set_defaults(func=cmd_select)

    pt = sub.add_parser("prior-table", help="exact prior probabilities over an enumerable space")
    pt.add_argument("--p", type=int, required=True)
    pt.add_argument("--degree", type=int, default=2)
    pt.add_argument("--heredity", choices=("strong", "weak"), default="strong")
    pt.add_argument("--base", help="extra base terms")
    pt.add_argument("--families", default="hip,hop,hup,hlp")
    pt.add_argument("--cap", type=int, default=10_000)
    pt.add_argument("--format", choices=("csv", "text"), default="csv")
    pt.add_argument("--out")
    pt.set_defaults(func=cmd_prior_table)

    pc = sub.add_parser("count", help="exact model-space cardinality")
    pc.add_argument("--p", type=int, required=True)
    pc.add_argument("--degree", type=int, default=2)
    pc.add_argument("--heredity", choices=("strong", "weak"), default="strong")
    pc.add_argument("--cap", type=int, default=1_000_000)
    pc.set_defaults(func=cmd_count)

    pp = sub.add_parser("predict", help="model-averaged prediction from a selection artifact")
    pp.add_argument("--artifact", required=True, help="JSON report written by select")
    pp.add_argument("--data", required=True, help="training CSV used for the selection run")
    pp.add_argument("--newdata", required=True, help="CSV of new main-effect rows")
    pp.add_argument("--top-k", dest="top_k", type=int, default=500)
    pp.add_argument("--out", required=True, help="predictions CSV")
    pp.set_defaults(func=cmd_predict)

    pm = sub.add_parser("simulate", help="run a simulation design file")
    pm.add_argument("--design", required=True, help="key=value design file")
    pm.add_argument("--out", required=True, help="results CSV")
    pm.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
