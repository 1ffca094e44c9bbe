"""Command-line front end.

Exit codes
----------
0  success (for ``axioms``: the verdict grid matches the expected one)
1  ``axioms`` found a grid mismatch
2  ``axioms`` could not settle an expected failure within the trial budget,
   or the command line could not be parsed
3  invalid configuration or input data

Environment
-----------
PPGAP_OUTPUT_DIR  directory that relative ``--output`` paths resolve against
PPGAP_THREADS     worker count; must be a positive integer. Commands run
                  sequentially, so values above 1 are accepted but unused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import axioms as lab
from .concordance import ConcordanceError, intensity_depth_scatter, rank_concordance
from .decomposition import decompose_by_subgroup, indicator_contributions
from .identification import build_profile, resolve_k, union_k
from .indicators import (BinaryIndicatorWarning, IngestionError, MISSING_POLICIES, SpecDocument,
                         SpecError, load_dataset, load_spec, weight_vector)
from .measures import AFUnavailableError, af_available, report_from_profile
from .reference import (POOLING, DegenerateColumnWarning, ReferenceDistribution,
                        ReferenceDistributionError, fit_reference, load_reference_file,
                        save_reference_file)

EXIT_CONFIG = 3
DEFAULT_K_GRID = ("union", 0.25, 0.33, 0.5, 0.67, 0.75, 1.0)
FORMATS = ("csv", "json")
CLI_MODES = ("in_sample", "anchored", "pooled")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated options shared by the subcommands."""

    command: str
    data: list = field(default_factory=list)
    spec: str | None = None
    mode: str = "in_sample"
    reference: str | None = None
    baseline: list = field(default_factory=list)
    k: list = field(default_factory=list)
    alpha: list = field(default_factory=lambda: [1.0])
    subgroup: str | None = None
    format: str = "csv"
    output: str | None = None
    missing_policy: str | None = None
    pooling: str = "concat"
    pretty: bool = False
    seed: int = 0
    trials: int = 10_000
    allow_inconsistent: bool = False
    per_subgroup_reference: bool = False
    threads: int = 1

    def validate(self) -> "RunConfig":
        if self.format not in FORMATS:
            raise ConfigError(f"--format must be one of {FORMATS}")
        if self.missing_policy is not None and self.missing_policy not in MISSING_POLICIES:
            raise ConfigError(f"--missing-policy must be one of {MISSING_POLICIES}")
        if self.pooling not in POOLING:
            raise ConfigError(f"--pooling must be one of {POOLING}")
        if self.threads < 1:
            raise ConfigError("PPGAP_THREADS must be a positive integer")
        for a in self.alpha:
            if not (math.isfinite(a) and a >= 1.0):
                raise ConfigError(f"alpha must be >= 1, got {a}")
        if self.command == "axioms":
            if self.trials < 1:
                raise ConfigError("--trials must be positive")
            return self
        if not self.spec:
            raise ConfigError("--spec is required")
        if not self.data:
            raise ConfigError("at least one --data path is required")
        for k in self.k:
            if not isinstance(k, str):
                if not 0.0 < k <= 1.0:
                    raise ConfigError(f"k values must lie in (0, 1], got {k}")
        if self.command == "anchor":
            if self.reference or self.baseline:
                raise ConfigError("anchor fits on --data; --reference/--baseline do not apply")
            return self
        if self.mode not in CLI_MODES:
            raise ConfigError(f"--mode must be one of {CLI_MODES}")
        if self.mode == "in_sample":
            if self.reference or self.baseline:
                raise ConfigError("--reference/--baseline need --mode anchored")
        elif self.mode == "pooled":
            if len(self.data) < 2:
                raise ConfigError("--mode pooled needs at least two --data paths")
            if self.reference or self.baseline:
                raise ConfigError("--mode pooled fits on the --data paths themselves")
        else:
            if bool(self.reference) == bool(self.baseline):
                raise ConfigError("--mode anchored needs exactly one of --reference or --baseline")
        if self.per_subgroup_reference and not self.allow_inconsistent:
            raise ConfigError("--per-subgroup-reference breaks the decomposition identity; "
                              "add --allow-inconsistent to proceed")
        return self


# ---------------------------------------------------------------------------
# Parsing


def _parse_k(text: str):
    rule = text.strip().lower()
    if rule in ("union", "intersection"):
        return rule
    try:
        return float(rule)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be a number or union/intersection, got {text!r}")


def _env_threads() -> int:
    raw = os.environ.get("PPGAP_THREADS", "1")
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"PPGAP_THREADS must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppgap", description="Counting poverty measures with positional depth scores.")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p, reference=True):
        p.add_argument("--spec", help="indicator spec (YAML or JSON)")
        p.add_argument("--data", action="append", default=[], help="CSV file; repeatable")
        p.add_argument("--missing-policy", choices=MISSING_POLICIES)
        p.add_argument("--pooling", choices=POOLING, default="concat")
        if reference:
            p.add_argument("--mode", choices=CLI_MODES, default="in_sample")
            p.add_argument("--reference", help="saved reference document (anchored mode)")
            p.add_argument("--baseline", action="append", default=[],
                           help="baseline CSV to anchor on; repeatable")
            p.add_argument("--k", action="append", type=_parse_k, default=[],
                           help="poverty cutoff, a number or union/intersection; repeatable")
            p.add_argument("--subgroup", help="subgroup column (overrides the spec)")

    def output_args(p):
        p.add_argument("--format", choices=FORMATS, default="csv")
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--pretty", action="store_true", help="round numbers to 3 decimals")

    p = sub.add_parser("compute", help="measure table over a k grid")
    data_args(p)
    output_args(p)
    p.add_argument("--alpha", action="append", type=float, default=[])

    p = sub.add_parser("anchor", help="fit and save a reference distribution")
    data_args(p, reference=False)
    p.add_argument("--output", required=True, help="where to write the reference")

    p = sub.add_parser("decompose", help="subgroup decomposition")
    data_args(p)
    output_args(p)
    p.add_argument("--allow-inconsistent", action="store_true")
    p.add_argument("--per-subgroup-reference", action="store_true")

    p = sub.add_parser("compare-af", help="rank concordance with normalized gaps")
    data_args(p)
    output_args(p)

    p = sub.add_parser("scatter", help="per-person intensity and depth of the poor")
    data_args(p)
    output_args(p)

    p = sub.add_parser("axioms", help="run the axiom laboratory")
    output_args(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--mode", choices=lab.LAB_MODES, action="append", default=[])
    p.add_argument("--identification", choices=lab.IDENTIFICATIONS, action="append", default=[])
    p.add_argument("--axiom", choices=lab.AXIOMS, action="append", default=[])
    p.add_argument("--no-exhaustive", action="store_true",
                   help="skip the exhaustive small-instance sweep")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command, threads=_env_threads())
    for name in ("data", "spec", "mode", "reference", "baseline", "k", "subgroup", "format",
                 "output", "missing_policy", "pooling", "pretty", "seed", "trials",
                 "allow_inconsistent", "per_subgroup_reference"):
        if hasattr(ns, name) and not (ns.command == "axioms" and name == "mode"):
            setattr(cfg, name, getattr(ns, name))
    if getattr(ns, "alpha", None):
        cfg.alpha = list(ns.alpha)
    return cfg.validate()


# ---------------------------------------------------------------------------
# Shared plumbing


def resolve_output(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get("PPGAP_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _load_doc(cfg: RunConfig) -> SpecDocument:
    doc = load_spec(cfg.spec)
    if cfg.subgroup:
        doc = replace(doc, subgroup_column=cfg.subgroup)
    return doc


def _load(cfg: RunConfig, paths) -> list:
    doc = _load_doc(cfg)
    return doc, [load_dataset(p, doc, cfg.missing_policy) for p in paths]


def _reference(cfg: RunConfig, doc: SpecDocument, datasets) -> ReferenceDistribution | None:
    """Shared reference for anchored/pooled modes; ``None`` means refit per dataset."""
    specs = list(doc.indicators)
    if cfg.mode == "anchored":
        if cfg.reference:
            ref = load_reference_file(cfg.reference)
            missing = [s.name for s in specs if s.name not in ref.names]
            if missing:
                raise ReferenceDistributionError(f"reference lacks indicators {missing}")
            return ref
        base = [load_dataset(p, doc, cfg.missing_policy) for p in cfg.baseline]
        return fit_reference(base, specs, mode="anchored", pooling=cfg.pooling)
    if cfg.mode == "pooled":
        return fit_reference(datasets, specs, mode="pooled", pooling=cfg.pooling)
    return None


def k_grid(ks, weights) -> list[float]:
    """Resolve the k list; the default grid drops values below union and duplicates."""
    raw = list(ks) if ks else list(DEFAULT_K_GRID)
    lo = union_k(weights)
    out = []
    for k in raw:
        value = resolve_k(k, weights)
        if not ks and value < lo:
            continue
        if value not in out:
            out.append(value)
    return sorted(out)


def _fmt(v, pretty: bool):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        if pretty:
            return f"{v:.3f}"
        return repr(v)
    return v


def write_csv(rows: list[dict], stream, pretty: bool = False) -> None:
    if not rows:
        return
    fields = list(rows[0].keys())
    for r in rows[1:]:
        fields += [k for k in r if k not in fields]
    w = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, ""), pretty) for k in fields})


def _round(obj, pretty: bool):
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, dict):
        return {k: _round(v, pretty) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, pretty) for v in obj]
    if not pretty:
        return obj
    if isinstance(obj, float):
        return round(obj, 3)
    return obj


def emit(cfg: RunConfig, payload: dict, table: list[dict], extra_tables: dict | None = None):
    """Write ``table`` as CSV or ``payload`` as JSON to --output or stdout.

    Extra tables go next to the main CSV file as ``<stem>_<name>.csv``.
    """
    out = resolve_output(cfg.output)
    if cfg.format == "json":
        text = json.dumps(_round(payload, cfg.pretty), indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        write_csv(table, buf, cfg.pretty)
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    if cfg.format == "csv" and extra_tables:
        for name, rows in extra_tables.items():
            buf = io.StringIO()
            write_csv(rows, buf, cfg.pretty)
            out.with_name(f"{out.stem}_{name}.csv").write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands


def cmd_compute(cfg: RunConfig) -> int:
    doc, datasets = _load(cfg, cfg.data)
    specs = list(doc.indicators)
    ref = _reference(cfg, doc, datasets)
    ks = k_grid(cfg.k, weight_vector(specs))
    af = af_available(specs)
    rows, reports = [], []
    for data in datasets:
        data_ref = ref if ref is not None else fit_reference(data, specs, provenance=False)
        for k in ks:
            profile = build_profile(data, specs, data_ref, k)
            for alpha in cfg.alpha:
                rep = report_from_profile(profile, specs, alpha=alpha, af=af, label=data.label)
                rows.append(rep.row())
                reports.append(rep.to_dict())
    payload = {"command": "compute", "mode": cfg.mode, "k_grid": ks, "rows": reports,
               "reference": None if ref is None else ref.provenance}
    emit(cfg, payload, rows)
    return 0


def cmd_anchor(cfg: RunConfig) -> int:
    doc, datasets = _load(cfg, cfg.data)
    mode = "pooled" if len(datasets) > 1 else "anchored"
    ref = fit_reference(datasets, list(doc.indicators), mode=mode, pooling=cfg.pooling)
    out = resolve_output(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_reference_file(ref, out)
    print(f"reference written to {out}; fingerprint {ref.provenance['fingerprint']}")
    return 0


def cmd_decompose(cfg: RunConfig) -> int:
    doc, datasets = _load(cfg, cfg.data)
    specs = list(doc.indicators)
    if not doc.subgroup_column:
        raise ConfigError("decompose needs a subgroup column (spec or --subgroup)")
    ref = _reference(cfg, doc, datasets)
    ks = k_grid(cfg.k, weight_vector(specs))
    table, payload_rows = [], []
    for data in datasets:
        data_ref = ref if ref is not None else fit_reference(data, specs, provenance=False)
        for k in ks:
            rep = decompose_by_subgroup(
                data, specs, data_ref, k, per_subgroup_reference=cfg.per_subgroup_reference,
                allow_inconsistent=cfg.allow_inconsistent)
            profile = build_profile(data, specs, data_ref, k)
            try:
                contrib = dict(zip([s.name for s in specs],
                                   indicator_contributions(profile).tolist()))
            except ValueError:
                contrib = {}
            for r in rep.table():
                r = {"dataset": data.label, **r, "residual": rep.residual}
                table.append(r)
            payload_rows.append({"dataset": data.label, "k": rep.k, "subgroups": rep.table(),
                                 "reconstruction": rep.reconstruction, "residual": rep.residual,
                                 "shared_reference": rep.shared_reference,
                                 "indicator_contributions": contrib})
    emit(cfg, {"command": "decompose", "mode": cfg.mode, "results": payload_rows}, table)
    return 0


def cmd_compare_af(cfg: RunConfig) -> int:
    doc, datasets = _load(cfg, cfg.data)
    specs = list(doc.indicators)
    if not af_available(specs):
        raise AFUnavailableError("compare-af needs cardinal indicators with nonzero cutoffs")
    ref = _reference(cfg, doc, datasets)
    ks = k_grid(cfg.k, weight_vector(specs))
    summary, scatter, hist, payload = [], [], [], []
    for data in datasets:
        data_ref = ref if ref is not None else fit_reference(data, specs, provenance=False)
        for k in ks:
            profile = build_profile(data, specs, data_ref, k)
            try:
                rep = rank_concordance(profile, specs)
            except ConcordanceError as exc:
                summary.append({"dataset": data.label, "k": k, "note": str(exc)})
                payload.append({"dataset": data.label, "k": k, "note": str(exc)})
                continue
            summary.append({"dataset": data.label, "k": k, **rep.summary()})
            scatter += [{"dataset": data.label, "k": k, **p} for p in rep.scatter()]
            hist += [{"dataset": data.label, "k": k, **b} for b in rep.histogram]
            payload.append({"dataset": data.label, "k": k, "summary": rep.summary(),
                            "scatter": rep.scatter(), "histogram": list(rep.histogram)})
    payload = json.loads(json.dumps(payload, default=float))
    emit(cfg, {"command": "compare-af", "results": payload}, summary,
         {"scatter": scatter, "histogram": hist})
    return 0


def cmd_scatter(cfg: RunConfig) -> int:
    doc, datasets = _load(cfg, cfg.data)
    specs = list(doc.indicators)
    ref = _reference(cfg, doc, datasets)
    ks = k_grid(cfg.k, weight_vector(specs))
    points, means, payload = [], [], []
    for data in datasets:
        data_ref = ref if ref is not None else fit_reference(data, specs, provenance=False)
        for k in ks:
            pts, avg = intensity_depth_scatter(build_profile(data, specs, data_ref, k))
            points += [{"dataset": data.label, "k": k, **p} for p in pts]
            means += [{"dataset": data.label, "k": k, **m} for m in avg]
            payload.append({"dataset": data.label, "k": k, "points": pts, "means": avg})
    emit(cfg, {"command": "scatter", "results": payload}, points, {"means": means})
    return 0


def cmd_axioms(cfg: RunConfig, ns: argparse.Namespace) -> int:
    report = lab.run_grid(
        seed=cfg.seed, trials=cfg.trials, exhaustive=not ns.no_exhaustive,
        modes=tuple(ns.mode) or lab.LAB_MODES,
        identifications=tuple(ns.identification) or lab.IDENTIFICATIONS,
        axioms=tuple(ns.axiom) or lab.AXIOMS)
    out = resolve_output(cfg.output)
    text = (json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
            if cfg.format == "json" else report.text() + "\n")
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        print(f"axiom report written to {out}; exit {report.exit_code}")
    return report.exit_code


COMMANDS = {"compute": cmd_compute, "anchor": cmd_anchor, "decompose": cmd_decompose,
            "compare-af": cmd_compare_af, "scatter": cmd_scatter}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BinaryIndicatorWarning)
            warnings.simplefilter("ignore", DegenerateColumnWarning)
            if cfg.command == "axioms":
                return cmd_axioms(cfg, ns)
            return COMMANDS[cfg.command](cfg)
    except (ConfigError, SpecError, IngestionError, ReferenceDistributionError,
            AFUnavailableError, lab.AxiomError, OSError, ValueError) as exc:
        print(f"ppgap {ns.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
