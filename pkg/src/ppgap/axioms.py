"""Executable axiom checks for the positional index.

Each axiom is a pair of functions: one lists candidate perturbations of a
base instance (a :class:`Case`), the other judges a case by running the
engine on both matrices. Axioms expected to hold are checked on every
ordinal matrix with n <= 4, d <= 2 and three categories, then on random
instances. Axioms expected to fail are searched for a witness, which is
shrunk and stored with enough data to replay it.

Two reference modes are compared. ``anchored`` fits the CDFs once on the
base matrix and scores the perturbed matrix against them; ``in_sample``
refits on whatever matrix is being scored.
"""

from __future__ import annotations

import itertools
import json
import math
import time
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from ._summation import exact_sum, row_sums
from .identification import build_profile, classify_k
from .indicators import ORDINAL, Dataset, IndicatorSpec
from .measures import adjusted_index, headcount, intensity, positional_gap
from .reference import DegenerateColumnWarning, ReferenceDistribution, fit_reference

ANCHORED = "anchored"
IN_SAMPLE = "in_sample"
LAB_MODES = (ANCHORED, IN_SAMPLE)
IDENTIFICATIONS = ("union", "intermediate", "intersection")
ALPHAS = (1.0, 2.0, 1.5)

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

DENOMINATOR = "denominator_effect"
PEER = "peer_redistribution"
DIRECT = "direct"
CONCAVITY = "concavity"

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INCONCLUSIVE = 2

# Tolerances: the identities below are exact in the engine's arithmetic
# except the ones that divide a sum of subgroup means.
DECOMP_TOL = 1e-9
REPLAY_TOL = 1e-12
SIGN_TOL = 1e-12


class AxiomError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Instances and evaluation


@lru_cache(maxsize=4096)
def _specs(names, scale_sizes, cutoffs, weights) -> tuple[IndicatorSpec, ...]:
    return tuple(IndicatorSpec(name=n, kind=ORDINAL, cutoff_z=int(z), weight_w=w,
                               categories=tuple(str(c) for c in range(size)))
                 for n, size, z, w in zip(names, scale_sizes, cutoffs, weights))


@dataclass(frozen=True, eq=False)
class Instance:
    """An ordinal achievement matrix with everything needed to score it."""

    values: np.ndarray
    survey_weight: np.ndarray
    scale_sizes: tuple
    cutoffs: tuple
    weights: tuple
    k: float
    alpha: float = 1.0
    names: tuple = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int64)
        if v.ndim != 2:
            raise AxiomError("values must be an n x d matrix")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "survey_weight", np.array(self.survey_weight, dtype=float))
        for name in ("scale_sizes", "cutoffs"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{j + 1}" for j in range(v.shape[1])))
        if not (len(self.scale_sizes) == len(self.cutoffs) == len(self.weights)
                == len(self.names) == v.shape[1]):
            raise AxiomError("indicator metadata does not match the number of columns")
        if self.survey_weight.shape != (v.shape[0],):
            raise AxiomError("one survey weight per row is required")
        if v.size and (v.min() < 0 or (v >= np.array(self.scale_sizes)).any()):
            raise AxiomError("codes outside the declared scale")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def specs(self):
        return _specs(self.names, self.scale_sizes, self.cutoffs, self.weights)

    @property
    def z(self) -> np.ndarray:
        return np.array(self.cutoffs)

    @property
    def identification(self) -> str:
        return classify_k(self.k, self.weights)

    def dataset(self) -> Dataset:
        return Dataset._trusted(self.values.astype(float), self.names, self.survey_weight)

    def _derive(self, values, survey_weight=None) -> "Instance":
        # Same indicators, new rows: skips the validation in __post_init__.
        obj = object.__new__(Instance)
        obj.__dict__.update(self.__dict__)
        obj.__dict__["values"] = values
        if survey_weight is not None:
            obj.__dict__["survey_weight"] = survey_weight
        return obj

    def with_values(self, values) -> "Instance":
        values = np.array(values, dtype=np.int64)
        if values.shape != self.values.shape:
            raise AxiomError("with_values keeps the matrix shape")
        return self._derive(values)

    def with_cell(self, i: int, j: int, x: int) -> "Instance":
        v = self.values.copy()
        v[i, j] = x
        return self._derive(v)

    def take_rows(self, rows) -> "Instance":
        rows = np.asarray(rows, dtype=int)
        return self._derive(self.values[rows], self.survey_weight[rows])

    def drop_column(self, j: int) -> "Instance | None":
        """Remove indicator j, renormalizing weights and keeping the identification rule."""
        keep = [c for c in range(self.d) if c != j]
        if not keep:
            return None
        w = np.array(self.weights)[keep]
        w = tuple((w / exact_sum(w)).tolist())
        rule = self.identification
        if rule == "union":
            k = min(w)
        elif rule == "intersection":
            k = 1.0
        else:
            k = self.k
            if not min(w) < k < 1.0:
                return None
        return Instance(self.values[:, keep], self.survey_weight,
                        tuple(self.scale_sizes[c] for c in keep),
                        tuple(self.cutoffs[c] for c in keep), w, k, self.alpha,
                        tuple(self.names[c] for c in keep))

    def to_dict(self) -> dict:
        return dict(values=self.values.tolist(), survey_weight=self.survey_weight.tolist(),
                    scale_sizes=list(self.scale_sizes), cutoffs=list(self.cutoffs),
                    weights=list(self.weights), k=self.k, alpha=self.alpha,
                    names=list(self.names))

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        return cls(np.array(d["values"], dtype=np.int64).reshape(-1, len(d["cutoffs"])),
                   d["survey_weight"], tuple(d["scale_sizes"]), tuple(d["cutoffs"]),
                   tuple(d["weights"]), d["k"], d.get("alpha", 1.0), tuple(d.get("names", ())))


@dataclass(frozen=True, eq=False)
class Evaluation:
    P: float
    P_i: np.ndarray
    profile: object
    ref: ReferenceDistribution


# Within one base instance many perturbations coincide (the same changed
# cell shows up under several axioms); the driver opens a memo per base.
_MEMO: dict | None = None


def _memo_key(inst: Instance, ref):
    return (id(ref), inst.values.shape, inst.values.tobytes(), inst.survey_weight.tobytes(),
            inst.names, inst.scale_sizes, inst.cutoffs, inst.weights, inst.k, inst.alpha)


def evaluate(inst: Instance, ref: ReferenceDistribution | None = None) -> Evaluation:
    """Score an instance through the engine; ``ref=None`` fits in-sample CDFs."""
    if _MEMO is None:
        return _evaluate(inst, ref)
    key = _memo_key(inst, ref)
    hit = _MEMO.get(key)
    if hit is None:
        hit = _MEMO[key] = _evaluate(inst, ref)
    return hit


def _evaluate(inst: Instance, ref: ReferenceDistribution | None) -> Evaluation:
    data = inst.dataset()
    specs = inst.specs
    if ref is None:
        ref = fit_reference(data, specs, provenance=False)
    profile = build_profile(data, specs, ref, inst.k)
    p_i, _, p_alpha = adjusted_index(profile, inst.alpha)
    if inst.alpha != 1.0:
        p_i = row_sums(profile.weights * profile.g1_censored ** inst.alpha)
    return Evaluation(p_alpha, p_i, profile, ref)


def evaluate_pair(mode: str, base: Instance, pert: Instance,
                  base_eval: Evaluation | None = None) -> tuple[Evaluation, Evaluation]:
    """Score base and perturbed matrices under ``mode``."""
    b = base_eval if base_eval is not None else evaluate(base)
    p = evaluate(pert, b.ref if mode == ANCHORED else None)
    return b, p


# ---------------------------------------------------------------------------
# Cases and outcomes


@dataclass(eq=False)
class Case:
    """One perturbation of a base instance.

    ``roles`` names the rows an axiom relies on (``i``, ``h``), ``cols`` the
    indicators (``j``, ``a``, ``b``); both are remapped when shrinking.
    """

    axiom: str
    base: Instance
    pert: Instance | None = None
    roles: dict = field(default_factory=dict)
    cols: dict = field(default_factory=dict)
    groups: tuple | None = None
    extra: dict = field(default_factory=dict)
    shrinkable: bool = True


@dataclass
class Outcome:
    violated: bool
    delta: float
    detail: dict = field(default_factory=dict)
    channel: str | None = None


# ---------------------------------------------------------------------------
# Shared helpers


def _poor(ev: Evaluation) -> np.ndarray:
    return ev.profile.rho


def _sign(x: float, tol: float) -> int:
    return 0 if abs(x) <= tol else (1 if x > 0 else -1)


def _column_moved(ref_a: ReferenceDistribution, ref_b: ReferenceDistribution, j: int) -> bool:
    da, db = ref_a.denominators[j], ref_b.denominators[j]
    return ref_a.min_values[j] != ref_b.min_values[j] or da != db


def classify_channel(b: Evaluation, p: Evaluation, rows, cols) -> str:
    """Tag an in-sample externality.

    ``denominator_effect`` when a changed column's minimum or normalizing
    share moved; ``peer_redistribution`` when the score of some other poor,
    deprived person moved in a changed column; ``direct`` otherwise.
    """
    rows = set(int(r) for r in rows)
    for j in cols:
        if _column_moved(b.ref, p.ref, j):
            return DENOMINATOR
    n = b.profile.s.shape[0]
    others = np.array([r not in rows for r in range(n)])
    for j in cols:
        peers = others & b.profile.rho & (b.profile.g0[:, j] > 0) & p.profile.rho \
            & (p.profile.g0[:, j] > 0)
        if np.any(b.profile.s[peers, j] != p.profile.s[peers, j]):
            return PEER
    return DIRECT


def _changed_cols(base: Instance, pert: Instance) -> list[int]:
    return [int(j) for j in np.flatnonzero((base.values != pert.values).any(axis=0))]


def _mass_between(ev: Evaluation, inst: Instance, mode: str, i: int, j: int,
                  lo: int, hi: int) -> float:
    """Reference weight on (lo, hi] in column j (excluding person i in-sample)."""
    col = inst.values[:, j]
    inside = (col > lo) & (col <= hi)
    if mode == IN_SAMPLE:
        inside[i] = False
    return exact_sum(inst.survey_weight[inside])


# ---------------------------------------------------------------------------
# Axioms: candidate generators


def _cell_values(inst: Instance, j: int):
    return range(inst.scale_sizes[j])


def _rng_pick(items: list, rng):
    if not items:
        return []
    return [items[int(rng.integers(len(items)))]]


def moves_symmetry(inst: Instance, rng=None) -> list[Case]:
    out = []
    n, d = inst.n, inst.d
    if rng is None:
        perms = [np.arange(n)[::-1], np.roll(np.arange(n), 1)] if n > 1 else []
        cperms = [np.arange(d)[::-1]] if d > 1 else []
    else:
        perms = [rng.permutation(n)]
        cperms = [rng.permutation(d)] if d > 1 else []
    for p in perms:
        out.append(Case("symmetry", inst, inst.take_rows(p), extra={"rows": p.tolist()},
                        shrinkable=False))
    for p in cperms:
        pert = Instance(inst.values[:, p], inst.survey_weight,
                        tuple(inst.scale_sizes[c] for c in p), tuple(inst.cutoffs[c] for c in p),
                        tuple(inst.weights[c] for c in p), inst.k, inst.alpha,
                        tuple(inst.names[c] for c in p))
        out.append(Case("symmetry", inst, pert, extra={"cols": p.tolist()}, shrinkable=False))
    if rng is not None:
        return _rng_pick(out, rng)
    return out


def moves_replication(inst: Instance, rng=None) -> list[Case]:
    reps = (2, 3) if rng is None else (int(rng.integers(2, 4)),)
    return [Case("replication", inst, inst.take_rows(np.tile(np.arange(inst.n), r)),
                 extra={"r": r}, shrinkable=False) for r in reps]


def moves_bounds(inst: Instance, rng=None) -> list[Case]:
    out = [Case("bounds", inst, inst, shrinkable=False)]
    # Pushing a cell to the bottom code is where P can approach 1.
    cells = [(i, j, 0) for i in range(inst.n) for j in range(inst.d) if inst.values[i, j] != 0]
    if rng is not None:
        cells += [(i, j, inst.scale_sizes[j] - 1) for i in range(inst.n) for j in range(inst.d)
                  if inst.values[i, j] != inst.scale_sizes[j] - 1]
        cells = _rng_pick(cells, rng)
        out = out if rng.integers(2) else []
    for i, j, x in cells:
        out.append(Case("bounds", inst, inst.with_cell(i, j, x), roles={"i": i}, cols={"j": j},
                        shrinkable=False))
    return out[:1] if rng is not None else out


def _relabel_maps(inst: Instance, rng=None) -> list[list[int]]:
    maps = []
    for size in inst.scale_sizes:
        if rng is None:
            maps.append([2 * c + 1 for c in range(size)])
        else:
            steps = rng.integers(1, 4, size=size)
            maps.append(np.cumsum(steps).tolist())
    return maps


def moves_ordinal_invariance(inst: Instance, rng=None) -> list[Case]:
    out = []
    if rng is None:
        extras = [None] + [(i, j) for i in range(inst.n) for j in range(inst.d)][:2]
    else:
        extras = [None, (int(rng.integers(inst.n)), int(rng.integers(inst.d)))]
        extras = extras[int(rng.integers(2)):][:1]
    for cell in extras:
        pert = inst
        if cell is not None:
            i, j = cell
            pert = inst.with_cell(i, j, (inst.values[i, j] + 1) % inst.scale_sizes[j])
        out.append(Case("ordinal_invariance", inst, pert, extra={"maps": _relabel_maps(inst, rng)},
                        shrinkable=False))
    return out


def moves_deprivation_focus(inst: Instance, rng=None) -> list[Case]:
    cells = [(i, j, x) for i in range(inst.n) for j in range(inst.d)
             if inst.values[i, j] >= inst.cutoffs[j]
             for x in range(inst.values[i, j] + 1, inst.scale_sizes[j])]
    if rng is not None:
        cells = _rng_pick(cells, rng)
    return [Case("deprivation_focus", inst, inst.with_cell(i, j, x), roles={"i": i},
                 cols={"j": j}) for i, j, x in cells]


def _scores_c(inst: Instance, row) -> float:
    return math.fsum(w for w, x, z in zip(inst.weights, row, inst.cutoffs) if x < z)


def _is_poor_row(inst: Instance, row) -> bool:
    return _scores_c(inst, row) >= inst.k - 1e-12


def moves_poverty_focus(inst: Instance, rng=None) -> list[Case]:
    nonpoor = [i for i in range(inst.n) if not _is_poor_row(inst, inst.values[i])]
    out = []
    if rng is None:
        rows = [r for r in itertools.product(*[range(s) for s in inst.scale_sizes])
                if not _is_poor_row(inst, r)]
        for i in nonpoor:
            for r in rows:
                if tuple(inst.values[i]) != r:
                    v = inst.values.copy()
                    v[i] = r
                    out.append(Case("poverty_focus", inst, inst.with_values(v), roles={"i": i}))
        return out
    if not nonpoor:
        return []
    i = nonpoor[int(rng.integers(len(nonpoor)))]
    for _ in range(20):
        r = [int(rng.integers(s)) for s in inst.scale_sizes]
        if not _is_poor_row(inst, r) and tuple(inst.values[i]) != tuple(r):
            v = inst.values.copy()
            v[i] = r
            return [Case("poverty_focus", inst, inst.with_values(v), roles={"i": i})]
    return []


def _worsenings(inst: Instance, crossing: bool | None):
    """Cells of poor persons and lower values; ``crossing`` selects the case."""
    out = []
    for i in range(inst.n):
        if not _is_poor_row(inst, inst.values[i]):
            continue
        for j in range(inst.d):
            x, z = inst.values[i, j], inst.cutoffs[j]
            for xn in range(x):
                cross = x >= z > xn
                deprived = x < z
                if (crossing is None and (cross or deprived)) or (crossing is True and cross) \
                        or (crossing is False and deprived):
                    out.append((i, j, xn))
    return out


def _worsening_cases(name, inst, rng, crossing):
    cells = _worsenings(inst, crossing)
    if rng is not None:
        cells = _rng_pick(cells, rng)
    return [Case(name, inst, inst.with_cell(i, j, x), roles={"i": i}, cols={"j": j})
            for i, j, x in cells]


def moves_own_monotonicity(inst, rng=None):
    return _worsening_cases("own_monotonicity", inst, rng, None)


def moves_aggregate_monotonicity(inst, rng=None):
    return _worsening_cases("aggregate_monotonicity", inst, rng, False)


def moves_dimensional_monotonicity(inst, rng=None):
    cells = [(i, j, xn) for i in range(inst.n) for j in range(inst.d)
             if inst.values[i, j] >= inst.cutoffs[j] for xn in range(inst.cutoffs[j])]
    if rng is not None:
        cells = _rng_pick(cells, rng)
    return [Case("dimensional_monotonicity", inst, inst.with_cell(i, j, x), roles={"i": i},
                 cols={"j": j}) for i, j, x in cells]


def _random_partition(n: int, rng, max_groups: int = 5) -> tuple:
    m = int(rng.integers(2, min(max_groups, n) + 1))
    labels = np.concatenate([np.arange(m), rng.integers(0, m, size=n - m)])
    rng.shuffle(labels)
    return tuple(int(x) for x in labels)


def _two_way_splits(n: int):
    for mask in range(1, 2 ** (n - 1)):
        yield tuple(int((mask >> r) & 1) for r in range(n))


def moves_decomposability(inst, rng=None):
    if inst.n < 2:
        return []
    if rng is None:
        parts = list(_two_way_splits(inst.n)) + [tuple(range(inst.n))]
    else:
        parts = [_random_partition(inst.n, rng)]
    return [Case("decomposability", inst, None, groups=g) for g in parts]


def moves_subgroup_consistency(inst, rng=None):
    if inst.n < 2:
        return []
    cells = [(i, j, x) for i in range(inst.n) for j in range(inst.d)
             for x in _cell_values(inst, j) if x != inst.values[i, j]]
    if rng is not None:
        cells = _rng_pick(cells, rng)
    out = []
    for i, j, x in cells:
        if rng is None:
            # Changed row plus all rows before it, or alone when it is last.
            cut = i if i < inst.n - 1 else -1
            parts = {tuple(int(r <= cut or r == i) for r in range(inst.n))}
        else:
            g = list(_random_partition(inst.n, rng, 3))
            parts = {tuple(int(lab == g[i]) for lab in g)}
        for p in sorted(parts):
            out.append(Case("subgroup_consistency", inst, inst.with_cell(i, j, x),
                            roles={"i": i}, cols={"j": j}, groups=p))
    return out


def moves_weak_rearrangement(inst, rng=None):
    if inst.d < 2 or len(set(inst.weights)) != 1:
        return []
    ref = None
    cells = []
    for i in range(inst.n):
        row = inst.values[i]
        if not _is_poor_row(inst, row):
            continue
        for a in range(inst.d):
            if row[a] >= inst.cutoffs[a]:
                continue
            for b in range(inst.d):
                if b == a or row[b] < inst.cutoffs[b]:
                    continue
                for xa in range(inst.cutoffs[a], inst.scale_sizes[a]):
                    for xb in range(inst.cutoffs[b]):
                        cells.append((i, a, b, xa, xb))
    if not cells:
        return []
    if rng is not None:
        cells = _rng_pick(cells, rng)
    out = []
    for i, a, b, xa, xb in cells:
        if ref is None:
            ref = fit_reference(inst.dataset(), inst.specs, provenance=False)
        # Premise: the new deprivation is no deeper than the one removed,
        # both judged against the base reference.
        if ref.scores(b, float(xb)) > ref.scores(a, float(inst.values[i, a])):
            continue
        v = inst.values.copy()
        v[i, a], v[i, b] = xa, xb
        out.append(Case("weak_rearrangement", inst, inst.with_values(v), roles={"i": i},
                        cols={"a": a, "b": b}))
    return out


def moves_weak_transfer(inst, rng=None):
    cells = []
    for j in range(inst.d):
        z = inst.cutoffs[j]
        for i in range(inst.n):
            for h in range(inst.n):
                xi, xh = inst.values[i, j], inst.values[h, j]
                if i == h or not xi < xh < z:
                    continue
                if not (_is_poor_row(inst, inst.values[i]) and _is_poor_row(inst, inst.values[h])):
                    continue
                for delta in range(1, (xh - xi) // 2 + 1):
                    cells.append((i, h, j, delta))
    if rng is not None:
        cells = _rng_pick(cells, rng)
    out = []
    for i, h, j, delta in cells:
        v = inst.values.copy()
        v[i, j] += delta
        v[h, j] -= delta
        out.append(Case("weak_transfer", inst, inst.with_values(v), roles={"i": i, "h": h},
                        cols={"j": j}, extra={"delta": int(delta)}))
    return out


# ---------------------------------------------------------------------------
# Axioms: judges


def judge_symmetry(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    return Outcome(p.P != b.P, p.P - b.P)


def judge_replication(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    tol = 0.0 if case.extra["r"] == 2 else REPLAY_TOL
    return Outcome(abs(p.P - b.P) > tol, p.P - b.P)


def judge_bounds(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    prof = p.profile
    _, a = intensity(prof)
    _, s = positional_gap(prof)
    _, P, P_alpha = adjusted_index(prof, case.pert.alpha)
    h = headcount(prof)
    bad = [name for name, v in (("H", h), ("A", a), ("S", s), ("P", P), ("P_alpha", P_alpha))
           if not 0.0 <= v <= 1.0]
    if prof.n_poor == 0 and P != 0.0:
        bad.append("P nonzero without poor")
    maximal = bool(prof.rho.all() and (prof.g1_censored == 1.0).all())
    if (P == 1.0) != maximal:
        bad.append("P = 1 iff maximal deprivation")
    if P_alpha > P:
        bad.append("P_alpha above P")
    return Outcome(bool(bad), P, {"failed": bad})


def judge_ordinal_invariance(case, mode, base_eval=None):
    maps = case.extra["maps"]

    def relabel(inst):
        v = np.column_stack([np.asarray(m)[inst.values[:, j]] for j, m in enumerate(maps)])
        return Instance(v, inst.survey_weight, tuple(m[-1] + 1 for m in maps),
                        tuple(m[z] for m, z in zip(maps, inst.cutoffs)), inst.weights, inst.k,
                        inst.alpha, inst.names)

    _, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    _, q = evaluate_pair(mode, relabel(case.base), relabel(case.pert))
    return Outcome(q.P != p.P, q.P - p.P)


def _equal_p(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    rows = list(case.roles.values())
    cols = _changed_cols(case.base, case.pert)
    delta = p.P - b.P
    channel = classify_channel(b, p, rows, cols) if delta != 0 and mode == IN_SAMPLE else None
    return Outcome(delta != 0.0, delta, channel=channel)


judge_deprivation_focus = _equal_p


def judge_poverty_focus(case, mode, base_eval=None):
    i = case.roles["i"]
    if _is_poor_row(case.base, case.base.values[i]) or _is_poor_row(case.pert, case.pert.values[i]):
        return Outcome(False, 0.0, {"premise": False})
    return _equal_p(case, mode, base_eval)


def judge_own_monotonicity(case, mode, base_eval=None):
    i, j = case.roles["i"], case.cols["j"]
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    x, xn = int(case.base.values[i, j]), int(case.pert.values[i, j])
    z = case.base.cutoffs[j]
    gain = p.P_i[i] - b.P_i[i]
    if x < z:
        s_old = b.profile.s[i, j]
        strict = s_old < 1.0 and _mass_between(b, case.base, mode, i, j, xn, x) > 0
    else:
        strict = bool(p.profile.rho[i]) and p.profile.s[i, j] > 0
    violated = gain < 0 or (strict and gain <= 0)
    return Outcome(bool(violated), float(gain), {"strict": bool(strict)})


def _monotone_total(case, mode, base_eval, crossing):
    i, j = case.roles["i"], case.cols["j"]
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    delta = p.P - b.P
    strict = False
    if mode == ANCHORED:
        if crossing:
            strict = bool(p.profile.rho[i]) and p.profile.s[i, j] > 0
        else:
            strict = bool(b.profile.rho[i]) and b.profile.s[i, j] < 1.0
    violated = delta < 0 or (strict and delta <= 0)
    channel = classify_channel(b, p, [i], [j]) if violated and mode == IN_SAMPLE else None
    return Outcome(bool(violated), delta, {"strict": bool(strict)}, channel)


def judge_aggregate_monotonicity(case, mode, base_eval=None):
    return _monotone_total(case, mode, base_eval, crossing=False)


def judge_dimensional_monotonicity(case, mode, base_eval=None):
    return _monotone_total(case, mode, base_eval, crossing=True)


def _group_rows(groups) -> dict:
    out = {}
    for r, g in enumerate(groups):
        out.setdefault(g, []).append(r)
    return out


def _subgroup_P(inst: Instance, rows, mode, ref) -> float:
    sub = inst.take_rows(rows)
    return evaluate(sub, ref if mode == ANCHORED else None).P


def judge_decomposability(case, mode, base_eval=None):
    b = base_eval if base_eval is not None else evaluate(case.base)
    W = exact_sum(case.base.survey_weight)
    parts = []
    for _, rows in sorted(_group_rows(case.groups).items()):
        share = exact_sum(case.base.survey_weight[rows]) / W
        parts.append(share * _subgroup_P(case.base, rows, mode, b.ref))
    resid = exact_sum(parts) - b.P
    return Outcome(abs(resid) > DECOMP_TOL, resid, {"reconstruction": exact_sum(parts),
                                                   "P": b.P})


def judge_subgroup_consistency(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    rows = [r for r, g in enumerate(case.groups) if g == case.groups[case.roles["i"]]]
    d_sub = (_subgroup_P(case.pert, rows, mode, b.ref) - _subgroup_P(case.base, rows, mode, b.ref))
    d_tot = p.P - b.P
    share = exact_sum(case.base.survey_weight[rows]) / exact_sum(case.base.survey_weight)
    s_sub = _sign(d_sub, SIGN_TOL)
    # Premise: the changed subgroup's own index moved. Under anchoring the
    # total must also move by exactly the population-share multiple.
    violated = s_sub != 0 and _sign(d_tot, SIGN_TOL * share) != s_sub
    if mode == ANCHORED and abs(d_tot - share * d_sub) > REPLAY_TOL:
        violated = True
    channel = None
    if violated and mode == IN_SAMPLE:
        channel = classify_channel(b, p, [case.roles["i"]], [case.cols["j"]])
    return Outcome(bool(violated), d_tot, {"delta_subgroup": d_sub, "share": share}, channel)


def judge_weak_rearrangement(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    delta = p.P - b.P
    channel = None
    if delta > 0 and mode == IN_SAMPLE:
        channel = classify_channel(b, p, [case.roles["i"]], list(case.cols.values()))
    return Outcome(delta > 0, delta, channel=channel)


def judge_weak_transfer(case, mode, base_eval=None):
    b, p = evaluate_pair(mode, case.base, case.pert, base_eval)
    i, h, j = case.roles["i"], case.roles["h"], case.cols["j"]
    delta = p.P - b.P
    detail = {"D_before": float(b.ref.denominators[j]), "D_after": float(p.ref.denominators[j]),
              "both_poor_after": bool(p.profile.rho[i] and p.profile.rho[h])}
    channel = None
    # A zero change (up to rounding) is the boundary case, not a witness.
    rises = delta > SIGN_TOL
    if rises:
        channel = CONCAVITY if mode == ANCHORED else classify_channel(b, p, [i, h], [j])
        if channel == DIRECT:
            channel = CONCAVITY
    return Outcome(rises and detail["both_poor_after"], delta, detail, channel)


@dataclass(frozen=True)
class Axiom:
    name: str
    moves: Callable
    judge: Callable
    equal_weights: bool = False
    needs_d2: bool = False


REGISTRY: dict[str, Axiom] = {a.name: a for a in (
    Axiom("symmetry", moves_symmetry, judge_symmetry),
    Axiom("replication", moves_replication, judge_replication),
    Axiom("bounds", moves_bounds, judge_bounds),
    Axiom("ordinal_invariance", moves_ordinal_invariance, judge_ordinal_invariance),
    Axiom("deprivation_focus", moves_deprivation_focus, judge_deprivation_focus),
    Axiom("poverty_focus", moves_poverty_focus, judge_poverty_focus),
    Axiom("own_monotonicity", moves_own_monotonicity, judge_own_monotonicity),
    Axiom("aggregate_monotonicity", moves_aggregate_monotonicity, judge_aggregate_monotonicity),
    Axiom("dimensional_monotonicity", moves_dimensional_monotonicity,
          judge_dimensional_monotonicity),
    Axiom("decomposability", moves_decomposability, judge_decomposability),
    Axiom("subgroup_consistency", moves_subgroup_consistency, judge_subgroup_consistency),
    Axiom("weak_rearrangement", moves_weak_rearrangement, judge_weak_rearrangement,
          equal_weights=True, needs_d2=True),
    Axiom("weak_transfer", moves_weak_transfer, judge_weak_transfer),
)}
AXIOMS = tuple(REGISTRY)

_IN_SAMPLE_FAILS = {"aggregate_monotonicity", "dimensional_monotonicity", "decomposability",
                    "subgroup_consistency", "weak_rearrangement", "weak_transfer"}


def expected_verdict(axiom: str, mode: str, identification: str | None = None) -> str:
    """Expected grid entry: every axiom holds under anchoring except weak transfer;
    in-sample CDFs also break the externality-sensitive ones, and poverty
    focus survives only union identification."""
    if axiom not in REGISTRY:
        raise AxiomError(f"unknown axiom {axiom!r}")
    if mode not in LAB_MODES:
        raise AxiomError(f"unknown mode {mode!r}")
    if axiom == "weak_transfer":
        return FAILS
    if mode == ANCHORED:
        return HOLDS
    if axiom == "poverty_focus":
        return HOLDS if identification == "union" else FAILS
    return FAILS if axiom in _IN_SAMPLE_FAILS else HOLDS


def grid_rows(modes=LAB_MODES, identifications=IDENTIFICATIONS, axioms=AXIOMS):
    """(axiom, mode, identification) rows; only poverty focus is split by identification."""
    rows = []
    for mode in modes:
        for ax in axioms:
            if ax == "poverty_focus":
                rows.extend((ax, mode, ident) for ident in identifications)
            else:
                rows.append((ax, mode, "all"))
    return rows


# ---------------------------------------------------------------------------
# Instance generation


_WEIGHT_DENOM = 16


def _grid_weights(d: int, rng, scheme: str) -> tuple:
    """Weights on a 1/16 grid so they sum to exactly 1."""
    if scheme == "equal" or d == 1:
        return tuple([1.0 / d] * d)
    cuts = np.sort(rng.choice(np.arange(1, _WEIGHT_DENOM), size=d - 1, replace=False))
    parts = np.diff(np.concatenate(([0], cuts, [_WEIGHT_DENOM])))
    return tuple((parts / _WEIGHT_DENOM).tolist())


def _k_for(weights, identification: str, rng) -> float:
    wmin = min(weights)
    if identification == "union":
        return wmin
    if identification == "intersection":
        return 1.0
    grid = [g / _WEIGHT_DENOM for g in range(1, _WEIGHT_DENOM)
            if wmin + 1e-9 < g / _WEIGHT_DENOM < 1.0 - 1e-9]
    if not grid:
        raise AxiomError("no intermediate cutoff exists for these weights")
    return grid[int(rng.integers(len(grid)))]


def gen_matrix(seed, n: int, d: int, scale_sizes, weight_scheme: str = "random",
               identification: str = "union", alpha: float = 1.0, skew: float = 0.0,
               survey_weights: str = "random", min_rows: int = 1) -> Instance:
    """Reproducible random ordinal instance.

    Parameters
    ----------
    seed : int or numpy Generator
    scale_sizes : int or sequence of int
        Categories per indicator (each >= 2). Scale 2 gives binary indicators.
    weight_scheme : {'equal', 'random'}
    skew : float
        Positive values pile mass on the lowest codes, which is where the
        in-sample denominator effects live; negative values favour the top.
    min_rows : int
        Transfer searches pass 2: they need two poor persons.
    """
    if n < max(1, min_rows):
        raise AxiomError(f"need at least {max(1, min_rows)} rows, got {n}")
    if d < 1:
        raise AxiomError("need at least one indicator")
    sizes = [int(scale_sizes)] * d if np.isscalar(scale_sizes) else [int(s) for s in scale_sizes]
    if len(sizes) != d or min(sizes) < 2:
        raise AxiomError("one scale size >= 2 per indicator is required")
    if weight_scheme not in ("equal", "random"):
        raise AxiomError(f"unknown weight scheme {weight_scheme!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cols = []
    for size in sizes:
        logits = -skew * np.arange(size) + rng.normal(0.0, 0.5, size=size)
        p = np.exp(logits - logits.max())
        cols.append(rng.choice(size, size=n, p=p / p.sum()))
    values = np.column_stack(cols)
    cutoffs = tuple(int(rng.integers(1, s)) for s in sizes)
    weights = _grid_weights(d, rng, weight_scheme)
    k = _k_for(weights, identification, rng)
    sw = rng.integers(1, 5, size=n).astype(float) if survey_weights == "random" else np.ones(n)
    return Instance(values, sw, tuple(sizes), cutoffs, weights, k, alpha)


def _random_instance(rng, axiom: Axiom, identification: str, alpha: float) -> Instance:
    d_lo = 2 if (axiom.needs_d2 or identification != "union") else 1
    d = int(rng.integers(d_lo, 5))
    n = int(rng.choice([2, 3, 4, 5, 6, 8, 10, 14, 20, 30]))
    sizes = [int(rng.integers(2, 7)) for _ in range(d)]
    scheme = "equal" if axiom.equal_weights or rng.random() < 0.3 else "random"
    if scheme == "equal" and d == 3:
        d, sizes = 4, sizes + [int(rng.integers(2, 7))]
    skew = float(rng.choice([-1.0, 0.0, 0.5, 1.0, 2.0]))
    sw = "unit" if rng.random() < 0.4 else "random"
    return gen_matrix(rng, n, d, sizes, scheme, identification, alpha, skew, sw)


# ---------------------------------------------------------------------------
# Exhaustive enumeration


EXHAUSTIVE_SCALE = 3
EXHAUSTIVE_MAX_N = 4
EXHAUSTIVE_MAX_D = 2
# (weights, identification rule); unequal weights make all three rules distinct.
EXHAUSTIVE_CONFIGS_D2 = (((0.5, 0.5), "union"), ((0.5, 0.5), "intersection"),
                         ((0.25, 0.75), "union"), ((0.25, 0.75), "intermediate"),
                         ((0.25, 0.75), "intersection"))


def exhaustive_instances(max_n: int = EXHAUSTIVE_MAX_N, max_d: int = EXHAUSTIVE_MAX_D,
                         scale: int = EXHAUSTIVE_SCALE) -> Iterator[Instance]:
    """Every ordinal matrix up to row order, n <= max_n, d <= max_d.

    Row order is covered by the symmetry axiom, so one representative per
    multiset of rows suffices. Smaller scales embed in ``scale``: codes
    {0, 1} with cutoff 1 are the binary case.
    """
    for d in range(1, max_d + 1):
        rows = list(itertools.product(range(scale), repeat=d))
        configs = [((1.0,), "union")] if d == 1 else list(EXHAUSTIVE_CONFIGS_D2)
        if d > 2:
            configs = [(tuple([1.0 / d] * d), "union"), (tuple([1.0 / d] * d), "intersection")]
        for cutoffs in itertools.product(range(1, scale), repeat=d):
            for weights, rule in configs:
                k = min(weights) if rule == "union" else (1.0 if rule == "intersection" else 0.5)
                for n in range(1, max_n + 1):
                    for combo in itertools.combinations_with_replacement(rows, n):
                        yield Instance(np.array(combo, dtype=np.int64).reshape(n, d), np.ones(n),
                                       (scale,) * d, cutoffs, weights, k, 1.0)


# ---------------------------------------------------------------------------
# Witnesses


def _remap(mapping: dict, removed: int) -> dict:
    return {k: (v - 1 if v > removed else v) for k, v in mapping.items()}


def shrink_case(case: Case, mode: str, judge: Callable, still_bad: Callable) -> Case:
    """Greedily drop uninvolved rows, then indicators, while the violation persists."""
    if not case.shrinkable:
        return case
    changed = True
    while changed:
        changed = False
        keep_rows = set(case.roles.values())
        for r in range(case.base.n - 1, -1, -1):
            if r in keep_rows or case.base.n <= max(2, len(keep_rows)):
                continue
            rows = [x for x in range(case.base.n) if x != r]
            groups = None
            if case.groups is not None:
                groups = tuple(case.groups[x] for x in rows)
                if len(set(groups)) < len(set(case.groups)):
                    continue
            cand = replace(case, base=case.base.take_rows(rows),
                           pert=None if case.pert is None else case.pert.take_rows(rows),
                           roles=_remap(case.roles, r), groups=groups)
            if still_bad(judge(cand, mode)):
                case, changed = cand, True
                break
        if changed:
            continue
        keep_cols = set(case.cols.values())
        for j in range(case.base.d - 1, -1, -1):
            if j in keep_cols:
                continue
            base = case.base.drop_column(j)
            pert = None if case.pert is None else case.pert.drop_column(j)
            if base is None or (case.pert is not None and pert is None):
                continue
            cand = replace(case, base=base, pert=pert, cols=_remap(case.cols, j))
            try:
                if still_bad(judge(cand, mode)):
                    case, changed = cand, True
                    break
            except AxiomError:
                continue
    return case


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


def case_to_dict(case: Case, mode: str, outcome: Outcome) -> dict:
    """Self-contained record of a witness; ``replay`` re-derives ``delta``."""
    return _jsonable({
        "axiom": case.axiom, "mode": mode, "identification": case.base.identification,
        "base": case.base.to_dict(),
        "pert": None if case.pert is None else case.pert.to_dict(),
        "roles": case.roles, "cols": case.cols,
        "groups": None if case.groups is None else list(case.groups),
        "extra": case.extra, "delta": outcome.delta, "channel": outcome.channel,
        "detail": outcome.detail,
        "changed_cells": [] if case.pert is None or case.pert.values.shape != case.base.values.shape
        else np.argwhere(case.base.values != case.pert.values).tolist(),
    })


def case_from_dict(d: dict) -> tuple[Case, str]:
    case = Case(d["axiom"], Instance.from_dict(d["base"]),
                None if d["pert"] is None else Instance.from_dict(d["pert"]),
                roles={k: int(v) for k, v in d["roles"].items()},
                cols={k: int(v) for k, v in d["cols"].items()},
                groups=None if d["groups"] is None else tuple(d["groups"]),
                extra=d.get("extra", {}))
    return case, d["mode"]


def replay(witness: dict) -> Outcome:
    """Re-evaluate a stored witness from its serialized matrices."""
    case, mode = case_from_dict(witness)
    if case.axiom not in REGISTRY:
        raise AxiomError(f"unknown axiom {case.axiom!r}")
    return REGISTRY[case.axiom].judge(case, mode)


def verify_witness(witness: dict, tol: float = REPLAY_TOL) -> bool:
    out = replay(witness)
    return out.violated and abs(out.delta - witness["delta"]) <= tol


# ---------------------------------------------------------------------------
# Driver


@dataclass
class RowResult:
    axiom: str
    mode: str
    identification: str
    expected: str
    observed: str = INCONCLUSIVE
    exhaustive_cases: int = 0
    random_trials: int = 0
    violations: int = 0
    seed: int = 0
    witnesses: list = field(default_factory=list)
    channels: list = field(default_factory=list)
    note: str = ""

    @property
    def matches(self) -> bool:
        return self.observed == self.expected

    def line(self) -> str:
        status = "ok" if self.matches else ("INCONCLUSIVE" if self.observed == INCONCLUSIVE
                                           else "MISMATCH")
        ch = f" channels={','.join(self.channels)}" if self.channels else ""
        note = f" ({self.note})" if self.note else ""
        return (f"{self.axiom:<26} {self.mode:<9} {self.identification:<12} "
                f"expected={self.expected:<5} observed={self.observed:<12} "
                f"exhaustive={self.exhaustive_cases:<7} random={self.random_trials:<6} "
                f"violations={self.violations:<4} seed={self.seed}{ch} [{status}]{note}")


@dataclass
class GridReport:
    rows: list
    seed: int
    trials: int
    exhaustive: bool
    seconds: float = 0.0

    @property
    def exit_code(self) -> int:
        if any(r.observed not in (HOLDS, FAILS) for r in self.rows):
            if all(r.matches or r.observed == INCONCLUSIVE for r in self.rows):
                return EXIT_INCONCLUSIVE
        return EXIT_OK if all(r.matches for r in self.rows) else EXIT_MISMATCH

    def row(self, axiom, mode, identification="all") -> RowResult:
        for r in self.rows:
            if (r.axiom, r.mode, r.identification) == (axiom, mode, identification):
                return r
        raise KeyError((axiom, mode, identification))

    def text(self) -> str:
        lines = [f"axiom grid: seed={self.seed} trials={self.trials} "
                 f"exhaustive={'on' if self.exhaustive else 'off'}"]
        lines += [r.line() for r in self.rows]
        for r in self.rows:
            for w in r.witnesses:
                lines.append(f"witness {r.axiom} {r.mode} {r.identification}: "
                             + json.dumps(w, sort_keys=True))
        verdict = {EXIT_OK: "grid matches", EXIT_MISMATCH: "grid MISMATCH",
                   EXIT_INCONCLUSIVE: "grid INCONCLUSIVE"}[self.exit_code]
        lines.append(f"{verdict} (exit {self.exit_code})")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return _jsonable({
            "seed": self.seed, "trials": self.trials, "exhaustive": self.exhaustive,
            "exit_code": self.exit_code,
            "rows": [dict(axiom=r.axiom, mode=r.mode, identification=r.identification,
                          expected=r.expected, observed=r.observed,
                          exhaustive_cases=r.exhaustive_cases, random_trials=r.random_trials,
                          violations=r.violations, seed=r.seed, channels=r.channels,
                          witnesses=r.witnesses, note=r.note) for r in self.rows]})


_MAX_KEPT = 3


def _row_key(axiom: str, mode: str, ident: str):
    return (axiom, mode, ident if axiom == "poverty_focus" else "all")


def _row_seed(seed: int, axiom: str, mode: str, ident: str) -> list[int]:
    return [int(seed), AXIOMS.index(axiom), LAB_MODES.index(mode),
            (IDENTIFICATIONS + ("all",)).index(ident)]


def _record(row: RowResult, case: Case, mode: str, out: Outcome, shrink: bool,
            channel: str | None = None):
    row.violations += 1
    if len(row.witnesses) >= _MAX_KEPT:
        return
    judge = REGISTRY[case.axiom].judge
    if shrink:
        case = shrink_case(case, mode, judge,
                           lambda o: o.violated and (channel is None or o.channel == channel))
        out = judge(case, mode)
    row.witnesses.append(case_to_dict(case, mode, out))


def _needed_channels(axiom: str, mode: str) -> set:
    if axiom == "aggregate_monotonicity" and mode == IN_SAMPLE:
        return {DENOMINATOR, PEER}
    return set()


def run_exhaustive(rows: dict, progress: Callable | None = None) -> None:
    """Check every expected-holds row on all small instances."""
    wanted = {}
    for (ax, mode, ident), row in rows.items():
        if row.expected == HOLDS:
            wanted.setdefault(mode, []).append((ax, ident))
    if not wanted:
        return
    global _MEMO
    for count, inst in enumerate(exhaustive_instances()):
        ident = inst.identification
        equal = inst.d > 1 and len(set(inst.weights)) == 1
        _MEMO = {}
        try:
            _exhaustive_base(inst, ident, equal, wanted, rows)
        finally:
            _MEMO = None
        if progress and count % 2000 == 0:
            progress(f"exhaustive: {count} instances")


def _exhaustive_base(inst, ident, equal, wanted, rows):
    base_eval = evaluate(inst)
    for mode, pairs in wanted.items():
        for ax, row_ident in pairs:
            if row_ident not in ("all", ident):
                continue
            axiom = REGISTRY[ax]
            # Equal-weight configurations exist for the axioms that need them.
            if axiom.equal_weights != equal:
                continue
            row = rows[(ax, mode, row_ident)]
            for case in axiom.moves(inst):
                row.exhaustive_cases += 1
                out = axiom.judge(case, mode, base_eval)
                if out.violated:
                    _record(row, case, mode, out, shrink=False)


MOVES_PER_INSTANCE = 4


def _random_row(row: RowResult, trials: int, seed: int) -> None:
    """Random trials for one grid row; each instance contributes a few moves."""
    global _MEMO
    axiom = REGISTRY[row.axiom]
    mode = row.mode
    rng = np.random.default_rng(_row_seed(seed, row.axiom, mode, row.identification))
    row.seed = int(seed)
    hunting = row.expected == FAILS
    need = _needed_channels(row.axiom, mode)
    found = set()
    attempts = 0
    while row.random_trials < trials and attempts < 20 * trials:
        t = attempts
        attempts += 1
        ident = IDENTIFICATIONS[t % 3] if row.identification == "all" else row.identification
        inst = _random_instance(rng, axiom, ident, ALPHAS[(t // 3) % 3])
        _MEMO = {}
        try:
            for _ in range(min(MOVES_PER_INSTANCE, trials - row.random_trials)):
                cases = axiom.moves(inst, rng)
                if not cases:
                    break
                row.random_trials += 1
                case = cases[0]
                out = axiom.judge(case, mode)
                if not out.violated:
                    continue
                if not hunting:
                    _record(row, case, mode, out, shrink=False)
                    continue
                if need:
                    if out.channel in found or out.channel not in need:
                        continue
                    found.add(out.channel)
                    _record(row, case, mode, out, shrink=True, channel=out.channel)
                    if found < need:
                        continue
                else:
                    _record(row, case, mode, out, shrink=True)
                return
        finally:
            _MEMO = None


def find_weak_transfer_witness(mode: str, seed: int = 0, budget: int = 10_000) -> dict | None:
    """Search for an equalizing transfer between two poor persons that raises P.

    Random instances are drawn with mass rising toward the cutoff, which
    makes 1 - F concave over the deprived range. A hand-built instance with
    masses 1, 2, 3 on codes 0, 1, 2 below the cutoff is tried last.
    """
    if mode not in LAB_MODES:
        raise AxiomError(f"unknown mode {mode!r}")
    axiom = REGISTRY["weak_transfer"]
    rng = np.random.default_rng([int(seed), AXIOMS.index("weak_transfer"), LAB_MODES.index(mode)])
    candidates = []
    for _ in range(budget):
        n = int(rng.integers(2, 9))
        inst = gen_matrix(rng, n, 1, int(rng.integers(3, 6)), "equal", "union",
                          skew=-1.0, survey_weights="unit", min_rows=2)
        candidates = axiom.moves(inst)
        for case in candidates:
            out = axiom.judge(case, mode)
            if out.violated:
                return _finish_transfer(case, mode)
    inst = Instance(np.array([[0], [1], [1], [2], [2], [2]]), np.ones(6), (4,), (3,), (1.0,), 1.0)
    for case in axiom.moves(inst):
        if axiom.judge(case, mode).violated:
            return _finish_transfer(case, mode)
    return None


def _finish_transfer(case: Case, mode: str) -> dict:
    judge = REGISTRY["weak_transfer"].judge
    case = shrink_case(case, mode, judge, lambda o: o.violated)
    out = judge(case, mode)
    return case_to_dict(case, mode, out)


def run_grid(seed: int = 0, trials: int = 10_000, exhaustive: bool = True,
             modes=LAB_MODES, identifications=IDENTIFICATIONS, axioms=AXIOMS,
             progress: Callable | None = None) -> GridReport:
    """Evaluate the verdict grid.

    Expected-holds rows get the exhaustive sweep plus ``trials`` random
    trials; a single violation flips them to ``fails``. Expected-fails rows
    search up to ``trials`` random instances for a witness and report
    ``inconclusive`` if none turns up.
    """
    for ax in axioms:
        if ax not in REGISTRY:
            raise AxiomError(f"unknown axiom {ax!r}")
    for mode in modes:
        if mode not in LAB_MODES:
            raise AxiomError(f"unknown mode {mode!r}")
    for ident in identifications:
        if ident not in IDENTIFICATIONS:
            raise AxiomError(f"unknown identification {ident!r}")
    start = time.perf_counter()
    rows = {}
    for ax, mode, ident in grid_rows(modes, identifications, axioms):
        rows[(ax, mode, ident)] = RowResult(ax, mode, ident,
                                            expected_verdict(ax, mode, ident), seed=int(seed))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateColumnWarning)
        if exhaustive:
            run_exhaustive(rows, progress)
        for key, row in rows.items():
            if row.axiom == "weak_transfer":
                w = find_weak_transfer_witness(row.mode, seed, trials)
                row.seed = int(seed)
                if w is not None:
                    row.witnesses.append(w)
                    row.violations += 1
                    row.channels = [w["channel"]]
                continue
            _random_row(row, trials, seed)
            if progress:
                progress(f"{row.axiom} {row.mode} {row.identification}: done")
        for row in rows.values():
            _settle(row)
    return GridReport(list(rows.values()), int(seed), int(trials), bool(exhaustive),
                      time.perf_counter() - start)


def _settle(row: RowResult) -> None:
    if row.expected == HOLDS:
        row.observed = FAILS if row.violations else HOLDS
        return
    need = _needed_channels(row.axiom, row.mode)
    channels = sorted({w.get("channel") for w in row.witnesses if w.get("channel")})
    row.channels = channels
    verified = [w for w in row.witnesses if verify_witness(w)]
    if not verified:
        row.observed = INCONCLUSIVE
        row.note = "no witness within budget"
    elif need - set(channels):
        row.observed = INCONCLUSIVE
        row.note = f"missing channel(s) {sorted(need - set(channels))}"
    else:
        row.observed = FAILS


def check_axiom(axiom: str, mode: str, identification: str = "all", trials: int = 10_000,
                seed: int = 0, exhaustive: bool = True) -> RowResult:
    """Verdict and witnesses for one grid row."""
    idents = IDENTIFICATIONS if identification == "all" else (identification,)
    report = run_grid(seed, trials, exhaustive, (mode,), idents, (axiom,))
    if axiom == "poverty_focus" and identification == "all":
        rows = report.rows
        merged = RowResult(axiom, mode, "all", HOLDS if all(r.expected == HOLDS for r in rows)
                           else FAILS)
        for r in rows:
            merged.exhaustive_cases += r.exhaustive_cases
            merged.random_trials += r.random_trials
            merged.violations += r.violations
            merged.witnesses += r.witnesses
        merged.observed = FAILS if merged.violations else HOLDS
        return merged
    return report.rows[0]


__all__ = [
    "ANCHORED", "AXIOMS", "Axiom", "AxiomError", "Case", "EXIT_INCONCLUSIVE", "EXIT_MISMATCH",
    "EXIT_OK", "Evaluation", "GridReport", "IDENTIFICATIONS", "IN_SAMPLE", "Instance",
    "LAB_MODES", "Outcome", "REGISTRY", "RowResult", "case_from_dict", "case_to_dict",
    "check_axiom", "classify_channel", "evaluate", "evaluate_pair", "exhaustive_instances",
    "expected_verdict", "find_weak_transfer_witness", "gen_matrix", "grid_rows", "replay",
    "run_grid", "shrink_case", "verify_witness",
]
