"""Indicator metadata, spec documents and dataset encoding.

Every indicator is stored internally on an ascending-good scale: ordinal
categories become codes ``0..X-1`` in declared order and lower-is-better
cardinal values are negated, so a single orientation (``x < z`` means
deprived) serves every downstream formula.
"""

from __future__ import annotations

import csv
import hashlib
import math
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import yaml

from ._summation import exact_sum

ORDINAL = "ordinal"
CARDINAL = "cardinal"
HIGHER_IS_BETTER = "higher-is-better"
LOWER_IS_BETTER = "lower-is-better"
MISSING_POLICIES = ("error", "drop-row", "treat-as-most-deprived")
MISSING_TOKENS = frozenset({"", "na", "n/a", "nan", "null", "none", "."})


class SpecError(ValueError):
    """Invalid indicator specification."""


class IngestionError(ValueError):
    """A data row cannot be encoded against the indicator specs."""


class BinaryIndicatorWarning(UserWarning):
    """Indicator with two categories: every deprived person scores depth 1."""


@dataclass(frozen=True)
class IndicatorSpec:
    """Metadata for one indicator.

    ``categories`` lists raw labels from worst to best. An entry may itself be
    a tuple of labels, which then share one achievement code (a semiorder).
    ``cutoff_z`` is given on the raw scale: a category label or code for
    ordinal indicators, a value for cardinal ones. Deprivation is strict:
    ``x < z``.
    """

    name: str
    kind: str
    cutoff_z: float | int | str
    weight_w: float = 1.0
    source_column: str | None = None
    categories: tuple = ()
    direction: str = HIGHER_IS_BETTER

    def __post_init__(self):
        if not self.name:
            raise SpecError("indicator name must be non-empty")
        if self.source_column is None:
            object.__setattr__(self, "source_column", self.name)
        if self.kind not in (ORDINAL, CARDINAL):
            raise SpecError(f"{self.name}: kind must be 'ordinal' or 'cardinal', got {self.kind!r}")
        w = float(self.weight_w)
        if not math.isfinite(w) or w <= 0:
            raise SpecError(f"{self.name}: nonpositive weight {self.weight_w!r}")
        object.__setattr__(self, "weight_w", w)
        if self.kind == ORDINAL:
            cats = tuple(tuple(str(v) for v in c) if isinstance(c, (list, tuple)) else str(c)
                         for c in self.categories)
            object.__setattr__(self, "categories", cats)
            self._check_categories()
            codes = {}
            for code, entry in enumerate(cats):
                for label in (entry if isinstance(entry, tuple) else (entry,)):
                    codes[label] = code
            object.__setattr__(self, "_codes", codes)
            code = self._resolve_cutoff_code()
            if not 0 < code < len(cats):
                raise SpecError(
                    f"{self.name}: trivial cutoff {self.cutoff_z!r}: no category below it "
                    "or none at/above it")
            object.__setattr__(self, "_threshold", float(code))
        else:
            if self.direction not in (HIGHER_IS_BETTER, LOWER_IS_BETTER):
                raise SpecError(f"{self.name}: unknown direction {self.direction!r}")
            try:
                z = float(self.cutoff_z)
            except (TypeError, ValueError):
                raise SpecError(f"{self.name}: cardinal cutoff must be numeric") from None
            if not math.isfinite(z):
                raise SpecError(f"{self.name}: cardinal cutoff must be finite")
            object.__setattr__(self, "_codes", {})
            object.__setattr__(self, "_threshold", -z if self.flipped else z)

    def _check_categories(self):
        if len(self.categories) < 2:
            raise SpecError(f"{self.name}: an ordinal indicator needs at least 2 categories")
        seen = set()
        for entry in self.categories:
            labels = entry if isinstance(entry, tuple) else (entry,)
            if not labels:
                raise SpecError(f"{self.name}: empty category group")
            for label in labels:
                if label in seen:
                    raise SpecError(f"{self.name}: duplicate category {label!r}")
                seen.add(label)

    def _resolve_cutoff_code(self) -> int:
        z = self.cutoff_z
        codes = self._codes
        if isinstance(z, str) and z in codes:
            return codes[z]
        if isinstance(z, bool):
            raise SpecError(f"{self.name}: cutoff must be a category label or code")
        try:
            as_float = float(z)
        except (TypeError, ValueError):
            raise SpecError(f"{self.name}: unknown cutoff category {z!r}") from None
        if not as_float.is_integer():
            raise SpecError(f"{self.name}: ordinal cutoff code must be an integer, got {z!r}")
        return int(as_float)

    @property
    def code_map(self) -> dict[str, int]:
        return dict(self._codes)

    @property
    def scale_size(self) -> int | None:
        return len(self.categories) if self.kind == ORDINAL else None

    @property
    def is_binary(self) -> bool:
        return self.kind == ORDINAL and len(self.categories) == 2

    @property
    def flipped(self) -> bool:
        return self.kind == CARDINAL and self.direction == LOWER_IS_BETTER

    @property
    def threshold(self) -> float:
        """Cutoff on the internal ascending-good scale."""
        return self._threshold

    def encode_value(self, raw) -> float:
        """Map one raw (non-missing) cell to the internal scale."""
        if self.kind == ORDINAL:
            label = str(raw).strip()
            if label not in self._codes:
                raise KeyError(label)
            return float(self._codes[label])
        x = float(raw)
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {raw!r}")
        return -x if self.flipped else x

    def to_dict(self) -> dict:
        d = {"name": self.name, "source_column": self.source_column, "kind": self.kind,
             "cutoff_z": self.cutoff_z, "weight_w": self.weight_w}
        if self.kind == ORDINAL:
            d["categories"] = [list(c) if isinstance(c, tuple) else c for c in self.categories]
        else:
            d["direction"] = self.direction
        return d


@dataclass(frozen=True)
class SpecDocument:
    indicators: tuple[IndicatorSpec, ...]
    survey_weight_column: str | None = None
    subgroup_column: str | None = None
    missing_policy: str = "error"


def normalize_weights(specs: Sequence[IndicatorSpec]) -> list[IndicatorSpec]:
    """Rescale weights to sum to one.

    Already-normalized input is returned unchanged, so the operation is
    idempotent bit for bit.
    """
    total = exact_sum([s.weight_w for s in specs])
    if abs(total - 1.0) <= 4 * np.finfo(float).eps:
        return list(specs)
    return [replace(s, weight_w=s.weight_w / total) for s in specs]


_SPEC_KEYS = {"name", "source_column", "kind", "categories", "direction", "cutoff_z",
              "weight_w", "cutoff", "weight"}


def _indicator_from_mapping(entry: Mapping) -> IndicatorSpec:
    if not isinstance(entry, Mapping):
        raise SpecError("each indicator must be a mapping")
    unknown = set(entry) - _SPEC_KEYS
    if unknown:
        raise SpecError(f"unknown indicator fields: {sorted(unknown)}")
    try:
        name = str(entry["name"])
        kind = entry["kind"]
    except KeyError as exc:
        raise SpecError(f"indicator missing required field {exc.args[0]!r}") from None
    cutoff = entry.get("cutoff_z", entry.get("cutoff"))
    if cutoff is None:
        raise SpecError(f"{name}: missing cutoff_z")
    return IndicatorSpec(
        name=name,
        kind=kind,
        cutoff_z=cutoff,
        weight_w=entry.get("weight_w", entry.get("weight", 1.0)),
        source_column=entry.get("source_column"),
        categories=tuple(entry.get("categories") or ()),
        direction=entry.get("direction", HIGHER_IS_BETTER),
    )


def parse_spec_document(text: str) -> SpecDocument:
    """Parse a YAML (or JSON) spec document with a top-level ``indicators`` list."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SpecError(f"malformed spec document: {exc}") from None
    if not isinstance(doc, Mapping) or "indicators" not in doc:
        raise SpecError("spec document must be a mapping with an 'indicators' list")
    entries = doc["indicators"]
    if not isinstance(entries, list) or not entries:
        raise SpecError("'indicators' must be a non-empty list")
    specs = [_indicator_from_mapping(e) for e in entries]
    names = [s.name for s in specs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise SpecError(f"duplicate indicator names: {dupes}")
    policy = doc.get("missing_policy", "error")
    if policy not in MISSING_POLICIES:
        raise SpecError(f"missing_policy must be one of {MISSING_POLICIES}")
    specs = normalize_weights(specs)
    for s in specs:
        if s.is_binary:
            warnings.warn(
                f"{s.name} is binary: every deprived person gets depth score 1",
                BinaryIndicatorWarning, stacklevel=2)
    return SpecDocument(
        indicators=tuple(specs),
        survey_weight_column=doc.get("survey_weight_column"),
        subgroup_column=doc.get("subgroup_column"),
        missing_policy=policy,
    )


def parse_spec(text: str) -> list[IndicatorSpec]:
    return list(parse_spec_document(text).indicators)


def load_spec(path) -> SpecDocument:
    return parse_spec_document(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Encoded achievement matrix with survey weights.

    ``values`` is ``n x d`` on the internal ascending-good scale, columns in
    the order of ``names``. ``missing`` marks cells that were filled under the
    ``treat-as-most-deprived`` policy.
    """

    values: np.ndarray
    names: tuple[str, ...]
    survey_weight: np.ndarray = None
    subgroup: np.ndarray | None = None
    missing: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be an n x d matrix")
        n, d = values.shape
        if n < 1 or d < 1:
            raise ValueError("a dataset needs n >= 1 rows and d >= 1 indicators")
        if len(self.names) != d:
            raise ValueError("names must match the number of columns")
        sw = np.ones(n) if self.survey_weight is None else np.array(self.survey_weight, dtype=float)
        if sw.shape != (n,):
            raise ValueError("survey_weight must have one entry per row")
        if not (np.isfinite(sw).all() and (sw > 0).all()):
            raise ValueError("survey weights must be finite and strictly positive")
        missing = np.zeros((n, d), bool) if self.missing is None else np.array(self.missing, bool)
        sub = None if self.subgroup is None else np.array(self.subgroup, dtype=object)
        if sub is not None and sub.shape != (n,):
            raise ValueError("subgroup must have one label per row")
        for arr in (values, sw, missing) + ((sub,) if sub is not None else ()):
            arr.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "survey_weight", sw)
        object.__setattr__(self, "missing", missing)
        object.__setattr__(self, "subgroup", sub)

    @classmethod
    def _trusted(cls, values: np.ndarray, names: tuple, survey_weight: np.ndarray) -> "Dataset":
        # Skips validation; for callers that already hold checked float arrays.
        obj = object.__new__(cls)
        for attr, val in (("values", values), ("names", names), ("survey_weight", survey_weight),
                          ("subgroup", None), ("missing", None), ("label", "")):
            object.__setattr__(obj, attr, val)
        return obj

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def total_weight(self) -> float:
        return exact_sum(self.survey_weight)

    def column_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown indicator {name!r}") from None

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            values=self.values[rows], names=self.names,
            survey_weight=self.survey_weight[rows],
            subgroup=None if self.subgroup is None else self.subgroup[rows],
            missing=None if self.missing is None else self.missing[rows], label=self.label)

    def with_values(self, values) -> "Dataset":
        return replace(self, values=values)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(",".join(self.names).encode())
        h.update(np.ascontiguousarray(self.values).tobytes())
        h.update(np.ascontiguousarray(self.survey_weight).tobytes())
        return h.hexdigest()[:16]


def _is_missing(cell) -> bool:
    return cell is None or str(cell).strip().lower() in MISSING_TOKENS


def encode_dataset(rows: Iterable[Mapping], specs: Sequence[IndicatorSpec],
                   survey_weight_column: str | None = None,
                   subgroup_column: str | None = None,
                   missing_policy: str = "error", label: str = "") -> Dataset:
    """Encode raw records onto the internal achievement scales.

    Rows are mappings from column name to raw cell (as produced by
    ``csv.DictReader``). Under ``treat-as-most-deprived`` a missing ordinal
    cell gets code 0 and a missing cardinal cell the lowest observed value of
    its column.
    """
    if missing_policy not in MISSING_POLICIES:
        raise ValueError(f"missing_policy must be one of {MISSING_POLICIES}")
    rows = list(rows)
    if not rows:
        raise IngestionError("no data rows")
    d = len(specs)
    values, weights, groups, masks = [], [], [], []
    for r, row in enumerate(rows, start=1):
        out = np.empty(d)
        mask = np.zeros(d, bool)
        for j, spec in enumerate(specs):
            col = spec.source_column
            if col not in row:
                raise IngestionError(f"row {r}: missing column {col!r}")
            cell = row[col]
            if _is_missing(cell):
                mask[j] = True
                out[j] = np.nan
                continue
            try:
                out[j] = spec.encode_value(cell)
            except KeyError:
                raise IngestionError(
                    f"row {r}, column {col!r}: unknown category {cell!r}") from None
            except ValueError:
                raise IngestionError(
                    f"row {r}, column {col!r}: non-numeric cardinal value {cell!r}") from None
        if mask.any() and missing_policy == "error":
            j = int(np.flatnonzero(mask)[0])
            raise IngestionError(f"row {r}, column {specs[j].source_column!r}: missing value")
        if mask.any() and missing_policy == "drop-row":
            continue
        if survey_weight_column is not None:
            if survey_weight_column not in row:
                raise IngestionError(f"row {r}: missing survey weight column {survey_weight_column!r}")
            try:
                wt = float(row[survey_weight_column])
            except (TypeError, ValueError):
                raise IngestionError(f"row {r}: non-numeric survey weight") from None
            if not math.isfinite(wt) or wt <= 0:
                raise IngestionError(f"row {r}: survey weight must be positive and finite")
            weights.append(wt)
        if subgroup_column is not None:
            if subgroup_column not in row or _is_missing(row[subgroup_column]):
                raise IngestionError(f"row {r}: missing subgroup label in {subgroup_column!r}")
            groups.append(str(row[subgroup_column]).strip())
        values.append(out)
        masks.append(mask)
    if not values:
        raise IngestionError("no rows left after dropping rows with missing cells")
    X = np.vstack(values)
    M = np.vstack(masks)
    for j, spec in enumerate(specs):
        if M[:, j].any():
            present = X[~M[:, j], j]
            if spec.kind == ORDINAL:
                X[M[:, j], j] = 0.0
            elif present.size:
                X[M[:, j], j] = present.min()
            else:
                raise IngestionError(f"column {spec.source_column!r} has no observed values")
    return Dataset(
        values=X, names=tuple(s.name for s in specs),
        survey_weight=np.array(weights) if survey_weight_column is not None else None,
        subgroup=np.array(groups, dtype=object) if subgroup_column is not None else None,
        missing=M, label=label)


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def load_dataset(path, doc: SpecDocument, missing_policy: str | None = None) -> Dataset:
    """Read a CSV file and encode it with the settings of ``doc``."""
    return encode_dataset(
        read_csv(path), doc.indicators,
        survey_weight_column=doc.survey_weight_column,
        subgroup_column=doc.subgroup_column,
        missing_policy=missing_policy or doc.missing_policy,
        label=Path(path).stem)


def thresholds(specs: Sequence[IndicatorSpec]) -> np.ndarray:
    return np.array([s.threshold for s in specs], dtype=float)


def weight_vector(specs: Sequence[IndicatorSpec]) -> np.ndarray:
    return np.array([s.weight_w for s in specs], dtype=float)


def ordinal_specs(scale_sizes: Sequence[int], cutoffs: Sequence[int],
                  weights: Sequence[float] | None = None, prefix: str = "x") -> list[IndicatorSpec]:
    """Build ordinal specs whose categories are the codes themselves."""
    if weights is None:
        weights = [1.0] * len(scale_sizes)
    specs = [IndicatorSpec(name=f"{prefix}{j + 1}", kind=ORDINAL, cutoff_z=int(z), weight_w=w,
                           categories=tuple(str(c) for c in range(size)))
             for j, (size, z, w) in enumerate(zip(scale_sizes, cutoffs, weights))]
    return normalize_weights(specs)


__all__ = [
    "BinaryIndicatorWarning", "Dataset", "IndicatorSpec", "IngestionError", "SpecDocument",
    "SpecError", "encode_dataset", "load_dataset", "load_spec", "normalize_weights",
    "ordinal_specs", "parse_spec", "parse_spec_document", "read_csv", "thresholds",
    "weight_vector",
]
