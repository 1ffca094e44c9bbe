"""Reference distributions and positional depth scores.

A reference holds one weighted empirical CDF per indicator,

    F_j(x) = sum(w_i for x_ij <= x) / sum(w_i),

stored as the ascending distinct support, the weighted mass on each support
point and the cumulative share up to it. The depth score of an achievement
``x`` is

    s_j(x) = (1 - F_j(x)) / (1 - F_j(m_j)),

with ``m_j`` the lowest value in the reference sample, clamped to [0, 1].
It is evaluated as the ratio of two correctly rounded upper-tail masses, so
integer survey weights give the exact quotient rounded once.

Modes only tag how the reference was obtained: ``in_sample`` (fitted on the
data being scored), ``anchored`` (fitted once on a baseline and reused) and
``pooled`` (fitted on several periods stacked together).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from ._summation import exact_prefix_sums, exact_sum
from .indicators import Dataset, IndicatorSpec

MODES = ("in_sample", "anchored", "pooled")
POOLING = ("concat", "equal_total")
FORMAT_NAME = "ppgap-reference"
FORMAT_VERSION = 1


class ReferenceDistributionError(ValueError):
    """Invalid, corrupted or mismatched reference distribution."""


class DegenerateColumnWarning(UserWarning):
    """All reference mass sits on one value, so D_j = 0."""


@dataclass(frozen=True, eq=False)
class ReferenceDistribution:
    names: tuple[str, ...]
    supports: tuple[np.ndarray, ...]
    cum_shares: tuple[np.ndarray, ...]
    mode: str = "in_sample"
    provenance: dict = field(default_factory=dict)
    masses: tuple | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ReferenceDistributionError(f"unknown reference mode {self.mode!r}")
        if not (len(self.names) == len(self.supports) == len(self.cum_shares)):
            raise ReferenceDistributionError("names, supports and cum_shares must align")
        supports, shares = [], []
        for name, sup, cum in zip(self.names, self.supports, self.cum_shares):
            sup = np.array(sup, dtype=float)
            cum = np.array(cum, dtype=float)
            if sup.ndim != 1 or sup.size == 0 or sup.shape != cum.shape:
                raise ReferenceDistributionError(
                    f"{name}: support and cum_share must be equal-length, non-empty")
            if np.any(np.diff(sup) <= 0):
                raise ReferenceDistributionError(f"{name}: support must be strictly ascending")
            if np.any(np.diff(cum) < 0) or cum[0] <= 0:
                raise ReferenceDistributionError(
                    f"{name}: cum_share must be positive and nondecreasing")
            if abs(cum[-1] - 1.0) > 1e-12:
                raise ReferenceDistributionError(f"{name}: cum_share must end at 1")
            sup.setflags(write=False)
            cum.setflags(write=False)
            supports.append(sup)
            shares.append(cum)
        masses = None
        if self.masses is not None:
            masses = tuple(_check_masses(name, m, cum)
                           for name, m, cum in zip(self.names, self.masses, shares))
            if len(masses) != len(shares):
                raise ReferenceDistributionError("one mass vector per indicator is required")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "supports", tuple(supports))
        object.__setattr__(self, "cum_shares", tuple(shares))
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_index", {n: j for j, n in enumerate(self.names)})
        object.__setattr__(self, "_tables", _tables(shares, masses))

    def index(self, j) -> int:
        if isinstance(j, str):
            try:
                return self._index[j]
            except KeyError:
                raise KeyError(f"reference has no indicator {j!r}") from None
        j = int(j)
        if not 0 <= j < len(self.names):
            raise KeyError(f"indicator index {j} out of range")
        return j

    @property
    def min_values(self) -> np.ndarray:
        return np.array([s[0] for s in self.supports])

    @property
    def denominators(self) -> np.ndarray:
        return np.array([1.0 - c[0] for c in self.cum_shares])

    @property
    def degenerate(self) -> tuple[str, ...]:
        return tuple(n for n, t in zip(self.names, self._tables) if t is None)

    @classmethod
    def _trusted(cls, names, supports, cum_shares, masses, mode, provenance):
        # Skips validation; only for arrays produced by _fit_column.
        obj = object.__new__(cls)
        for attr, val in (("names", tuple(names)), ("supports", tuple(supports)),
                          ("cum_shares", tuple(cum_shares)), ("masses", tuple(masses)),
                          ("mode", mode), ("provenance", provenance),
                          ("_index", {n: j for j, n in enumerate(names)}),
                          ("_tables", _tables(cum_shares, masses))):
            object.__setattr__(obj, attr, val)
        return obj

    def cdf(self, j, x):
        """Right-continuous step evaluation of F_j; 0 below the support."""
        j = self.index(j)
        x = np.asarray(x, dtype=float)
        out = _column_cdf(self.supports[j], self.cum_shares[j], x)
        return float(out) if out.ndim == 0 else out

    def scores(self, j, x):
        """Positional depth scores for achievements ``x`` in indicator ``j``."""
        j = self.index(j)
        x = np.asarray(x, dtype=float)
        out = self._column(j, x)
        return float(out) if out.ndim == 0 else out

    def _column(self, j: int, x: np.ndarray) -> np.ndarray:
        table = self._tables[j]
        if table is None:
            return (x <= self.supports[j][0]).astype(float)
        return table[self.supports[j].searchsorted(x, side="right")]

    def score_matrix(self, data: Dataset | np.ndarray, names=None) -> np.ndarray:
        """Score every cell (columns matched by indicator name)."""
        if isinstance(data, Dataset):
            values, names = data.values, data.names
        else:
            values = np.asarray(data, dtype=float)
        s = np.empty(values.shape)
        for col, name in enumerate(names):
            j = self.index(name)
            s[:, col] = self._column(j, values[:, col])
        return s

    def covers(self, names) -> bool:
        return all(n in self._index for n in names)


def _column_cdf(sup, cum, x):
    idx = np.searchsorted(sup, x, side="right") - 1
    return np.where(idx < 0, 0.0, cum[idx])


def _check_masses(name, mass, cum):
    m = np.array(mass, dtype=float)
    if m.shape != cum.shape or not (np.isfinite(m).all() and (m > 0).all()):
        raise ReferenceDistributionError(f"{name}: masses must be positive, one per support point")
    implied = exact_prefix_sums(m, range(1, m.size + 1)) / exact_sum(m)
    if np.abs(implied - cum).max() > 1e-12:
        raise ReferenceDistributionError(f"{name}: masses inconsistent with cum_share")
    m.setflags(write=False)
    return m


def _upper_tails(mass) -> list:
    """tail[i] = fsum(mass[i + 1:]), each correctly rounded."""
    m = mass.tolist() if isinstance(mass, np.ndarray) else list(mass)
    L = len(m)
    if L <= 256:
        return [math.fsum(m[i + 1:]) for i in range(L)]
    return exact_prefix_sums(m[::-1], range(L))[::-1].tolist()


def _score_table(cum, mass=None):
    """Depth score on each step of F: entry i covers sup[i-1] <= x < sup[i].

    Entry 0 is below the support (F = 0) and clamps to 1. A degenerate
    column (D = 0) has no table: it scores 1 at or below its atom, else 0.
    Without masses (older documents) the scores come from the shares.
    """
    if mass is not None:
        tails = _upper_tails(mass)
        denom = tails[0]
        if denom == 0.0:
            return None
        body = [t / denom for t in tails]
    else:
        denom = 1.0 - float(cum[0])
        if denom == 0.0:
            return None
        body = [(1.0 - f) / denom for f in cum.tolist()]
    table = np.array([1.0] + [min(max(v, 0.0), 1.0) for v in body])
    table.setflags(write=False)
    return table


def _tables(shares, masses):
    if masses is None:
        return tuple(_score_table(c) for c in shares)
    return tuple(_score_table(c, m) for c, m in zip(shares, masses))


def _fit_column(x: np.ndarray, w: np.ndarray):
    """Support, per-point masses and cumulative shares.

    Each share is fsum(prefix) / fsum(all); each mass is the fsum of the
    weights sitting on one support point.
    """
    if x.size <= 64:
        # Small columns (the axiom lab's bread and butter) stay in plain Python.
        pairs = sorted(zip(x.tolist(), w.tolist()))
        ws = [p[1] for p in pairs]
        support, ends = [], []
        for pos, (v, _) in enumerate(pairs):
            if not support or v != support[-1]:
                if support:
                    ends.append(pos)
                support.append(v)
        ends.append(len(pairs))
        total = math.fsum(ws)
        if not total > 0:
            raise ReferenceDistributionError("nonpositive total weight")
        starts = [0] + ends[:-1]
        support = np.array(support)
        cum = np.array([math.fsum(ws[:e]) / total for e in ends])
        mass = np.array([math.fsum(ws[a:b]) for a, b in zip(starts, ends)])
        for arr in (support, cum, mass):
            arr.setflags(write=False)
        return support, cum, mass
    else:
        order = np.argsort(x, kind="stable")
        xs, ws = x[order], w[order]
        support, starts = np.unique(xs, return_index=True)
        ends = np.append(starts[1:], xs.size)
    total = exact_sum(ws)
    if not total > 0:
        raise ReferenceDistributionError("nonpositive total weight")
    prefix = exact_prefix_sums(ws, ends)
    cum = prefix / total
    starts = [0] + list(ends[:-1])
    ws_list = ws if isinstance(ws, list) else ws.tolist()
    mass = np.array([exact_sum(ws_list[a:b]) for a, b in zip(starts, ends)])
    for arr in (support, cum, mass):
        arr.setflags(write=False)
    return support, cum, mass


def _fingerprint(names, X, W) -> str:
    h = hashlib.sha256(",".join(names).encode())
    h.update(np.ascontiguousarray(X).tobytes())
    h.update(np.ascontiguousarray(W).tobytes())
    return h.hexdigest()[:16]


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.replace(microsecond=0).isoformat()


def fit_reference(data: Dataset | Sequence[Dataset], specs: Sequence[IndicatorSpec] | None = None,
                  mode: str = "in_sample", pooling: str = "concat",
                  provenance: bool = True) -> ReferenceDistribution:
    """Fit per-indicator weighted empirical CDFs.

    Parameters
    ----------
    data : Dataset or sequence of Dataset
        Several datasets are stacked before fitting (pooled references).
    specs : list of IndicatorSpec, optional
        Restricts and orders the fitted indicators; defaults to all columns.
    mode : {'in_sample', 'anchored', 'pooled'}
        Tag stored with the reference.
    pooling : {'concat', 'equal_total'}
        How stacked datasets are weighted: raw concatenation, or rescaling
        each dataset's survey weights to a common total first.
    provenance : bool
        Record source fingerprint and fit time. Transient in-sample fits
        skip it.
    """
    if mode not in MODES:
        raise ReferenceDistributionError(f"mode must be one of {MODES}")
    if pooling not in POOLING:
        raise ReferenceDistributionError(f"pooling must be one of {POOLING}")
    parts = [data] if isinstance(data, Dataset) else list(data)
    if not parts:
        raise ReferenceDistributionError("no data to fit")
    names = tuple(s.name for s in specs) if specs is not None else parts[0].names
    columns, weights = [], []
    for part in parts:
        idx = [part.column_index(n) for n in names]
        columns.append(part.values if idx == list(range(part.d)) else part.values[:, idx])
        w = part.survey_weight
        weights.append(w / exact_sum(w) if pooling == "equal_total" and len(parts) > 1 else w)
    X = columns[0] if len(columns) == 1 else np.vstack(columns)
    W = weights[0] if len(weights) == 1 else np.concatenate(weights)
    if X.shape[0] == 0 or not np.isfinite(X).all():
        bad = [n for j, n in enumerate(names) if X.shape[0] == 0 or not np.isfinite(X[:, j]).all()]
        raise ReferenceDistributionError(f"{bad[0]}: empty or non-finite indicator column")
    supports, shares, masses = [], [], []
    for j in range(len(names)):
        sup, cum, mass = _fit_column(X[:, j], W)
        supports.append(sup)
        shares.append(cum)
        masses.append(mass)
    record = {}
    if provenance:
        record = {
            "fingerprint": _fingerprint(names, X, W),
            "sources": [p.label for p in parts],
            "fitted_at": _timestamp(),
            "pooling": pooling if len(parts) > 1 else "none",
            "n": int(X.shape[0]),
        }
    ref = ReferenceDistribution._trusted(names, supports, shares, masses, mode, record)
    for name in ref.degenerate:
        warnings.warn(f"{name}: all reference mass on one value; depth scores are 0/1",
                      DegenerateColumnWarning, stacklevel=2)
    return ref


def cdf_value(ref: ReferenceDistribution, j, x) -> float:
    return ref.cdf(j, x)


def positional_depth_score(ref: ReferenceDistribution, j, x) -> float:
    return ref.scores(j, x)


def _num(v: float):
    return int(v) if float(v).is_integer() and abs(v) < 2**53 else float(v)


def save_reference(ref: ReferenceDistribution) -> str:
    """Serialize to a versioned JSON document (floats round-trip exactly)."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "mode": ref.mode,
        "provenance": ref.provenance,
        "indicators": [
            {
                "name": name,
                "support": [_num(v) for v in sup],
                "cum_share": [float(c) for c in cum],
                **({"mass": [float(v) for v in ref.masses[j]]} if ref.masses else {}),
                "min_value": _num(sup[0]),
                "denominator": float(1.0 - cum[0]),
            }
            for j, (name, sup, cum) in enumerate(zip(ref.names, ref.supports, ref.cum_shares))
        ],
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def load_reference(text: str) -> ReferenceDistribution:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReferenceDistributionError(f"reference document is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise ReferenceDistributionError("not a ppgap reference document")
    if doc.get("version") != FORMAT_VERSION:
        raise ReferenceDistributionError(f"unsupported reference version {doc.get('version')!r}")
    names, supports, shares, masses = [], [], [], []
    for rec in doc.get("indicators", []):
        try:
            sup = np.array(rec["support"], dtype=float)
            cum = np.array(rec["cum_share"], dtype=float)
            masses.append(None if rec.get("mass") is None else np.array(rec["mass"], dtype=float))
            names.append(rec["name"])
            m, dj = float(rec["min_value"]), float(rec["denominator"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ReferenceDistributionError(f"malformed indicator record: {exc}") from None
        if sup.size and (m != sup[0] or dj != 1.0 - cum[0]):
            raise ReferenceDistributionError(f"{rec['name']}: min_value/denominator inconsistent with shares")
        supports.append(sup)
        shares.append(cum)
    if not names:
        raise ReferenceDistributionError("reference document lists no indicators")
    if any(m is None for m in masses) and not all(m is None for m in masses):
        raise ReferenceDistributionError("mass vectors must be given for all indicators or none")
    return ReferenceDistribution(tuple(names), tuple(supports), tuple(shares),
                                 doc.get("mode", "anchored"), dict(doc.get("provenance", {})),
                                 None if masses[0] is None else tuple(masses))


def save_reference_file(ref: ReferenceDistribution, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_reference(ref))


def load_reference_file(path) -> ReferenceDistribution:
    with open(path, encoding="utf-8") as fh:
        return load_reference(fh.read())
