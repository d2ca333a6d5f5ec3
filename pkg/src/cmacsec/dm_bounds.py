"""
Single-letter rate bounds for a discrete memoryless compound MAC with a
confidential message, and lattice sweeps over the auxiliary laws.

Every bound is a combination of (conditional) mutual informations of a joint
law built from an auxiliary chain and the channel. The same formula
functions are evaluated two ways: law-by-law through :mod:`cmacsec.info`
(``*_constraints``), and in vectorized batches for sweeps.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import info
from .errors import BudgetError, UsageError, ValidationError
from .info import ConditionalPmf, DmChannel, InnerAuxLaw, OuterAuxLaw, Pmf
from .region import ConstraintSet, RegionCloud, batch_vertices

DEFAULT_BUDGET = 5_000_000
VIOLATION_TOL = 1e-9
SAMPLED_OUTER_LABEL = "sampled outer region (under-approximation of the true outer bound)"

INNER_COEFFS = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]])
OUTER_COEFFS = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]])
LESS_NOISY_COEFFS = OUTER_COEFFS


@dataclass(frozen=True)
class SweepConfig:
    """Lattice resolution and alphabet sizes for a sweep over auxiliary laws.

    Every probability vector ranges over multiples of ``1/k``. Optional
    ``random_samples`` add uniform-Dirichlet draws, sample ``i`` seeded from
    ``(seed, i)``.
    """

    u_size: int = 2
    v1_size: int = 2
    v2_size: int = 2
    k: int = 2
    random_samples: int = 0
    seed: Optional[int] = None
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        for name in ("u_size", "v1_size", "v2_size", "k"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.random_samples < 0:
            raise ValidationError("random_samples must be >= 0")
        if self.random_samples and self.seed is None:
            raise ValidationError("a seed is required when random_samples > 0")

    def as_dict(self):
        return {"u_size": self.u_size, "v1_size": self.v1_size, "v2_size": self.v2_size,
                "k": self.k, "random_samples": self.random_samples, "seed": self.seed}


@dataclass
class LessNoisyVerdict:
    status: str
    witness: Optional[dict]
    resolution: dict = field(default_factory=dict)

    def to_dict(self):
        return {"status": self.status, "witness": self.witness, "resolution": self.resolution}


# ---------------------------------------------------------------------------
# bound formulas, written once against an abstract ``mi(a, b, c)``

def _inner_formulas(mi):
    leak = mi("V1", "Y2", ("X2", "U"))
    return [
        mi("V1", "Y1", ("X2", "U")) - leak,
        np.minimum(mi("X2", "Y1", ("V1", "U")), mi("X2", "Y2", "U")),
        mi(("U", "X2"), "Y2"),
        mi(("V1", "X2"), "Y1", "U") - leak,
        mi(("V1", "X2"), "Y1") - leak,
    ]


def _outer_formulas(mi):
    leak = mi("V1", "Y2", ("U", "V2"))
    return [
        np.minimum(mi("U", "Y1"), mi("U", "Y2")),
        mi("V1", "Y1", ("U", "V2")) - leak,
        np.minimum(mi("V2", "Y1"), mi("V2", "Y2")),
        mi(("V1", "V2"), "Y1") - leak,
    ]


def _less_noisy_formulas(mi):
    leak = mi("V1", "Y2", "V2")
    r1 = mi("V1", "Y1", "V2") - leak
    return [
        np.zeros_like(r1),  # no common message in this model
        r1,
        mi("V2", "Y2"),
        mi(("V1", "V2"), "Y1") - leak,
    ]


def _scalar_mi(joint):
    def mi(a, b, c=()):
        return info.conditional_mutual_information(joint, a, b, c)
    return mi


def inner_constraints(aux: InnerAuxLaw, ch: DmChannel) -> ConstraintSet:
    """Inner-bound constraints (binning scheme) for one auxiliary law."""
    joint = info.build_inner_law(aux, ch)
    return ConstraintSet(INNER_COEFFS, _inner_formulas(_scalar_mi(joint)), "thm2")


def outer_constraints(aux: OuterAuxLaw, ch: DmChannel) -> ConstraintSet:
    """Outer-bound constraints for one auxiliary law."""
    joint = info.build_outer_law(aux, ch)
    return ConstraintSet(OUTER_COEFFS, _outer_formulas(_scalar_mi(joint)), "thm1")


def _is_product(table, tol=info.PROB_TOL):
    return np.allclose(table, np.outer(table.sum(axis=1), table.sum(axis=0)), atol=tol, rtol=0)


def less_noisy_constraints(aux: OuterAuxLaw, ch: DmChannel, mode="inner") -> ConstraintSet:
    """Less-noisy model constraints; R0 is pinned to 0.

    ``aux`` must have a single-letter U. ``mode="inner"`` requires V1 and V2
    independent; ``mode="outer"`` allows any joint p(v1, v2).
    """
    if mode not in ("inner", "outer"):
        raise UsageError(f"mode must be 'inner' or 'outer', got {mode!r}")
    if aux.p_u.support_size != 1:
        raise ValidationError("less-noisy laws have no U; use |U| = 1")
    if mode == "inner" and not _is_product(aux.v1v2_table()[0]):
        raise ValidationError("inner mode needs independent V1 and V2")
    joint = info.marginalize(info.build_outer_law(aux, ch), ("V1", "V2", "X1", "X2", "Y1", "Y2"))
    tag = "thm4" if mode == "inner" else "thm3"
    return ConstraintSet(LESS_NOISY_COEFFS, _less_noisy_formulas(_scalar_mi(joint)), tag)


# ---------------------------------------------------------------------------
# batched evaluation

class _BatchInfo:
    """Entropies of marginals of a batch of joint tables, axis 0 indexing the batch."""

    def __init__(self, table, names):
        self.table = table
        self.names = tuple(names)
        self._cache = {}

    def h(self, labels):
        key = frozenset(labels)
        if not key:
            return np.zeros(self.table.shape[0])
        if key not in self._cache:
            drop = tuple(i + 1 for i, n in enumerate(self.names) if n not in key)
            marg = self.table.sum(axis=drop).reshape(self.table.shape[0], -1)
            with np.errstate(divide="ignore", invalid="ignore"):
                terms = np.where(marg > 0, marg * np.log2(marg), 0.0)
            self._cache[key] = -terms.sum(axis=1)
        return self._cache[key]

    def mi(self, a, b, c=()):
        a, b, c = ({x} if isinstance(x, str) else set(x) for x in (a, b, c))
        h = self.h
        value = h(a | c) + h(b | c) - h(a | b | c) - h(c)
        return np.maximum(value, 0.0)


@lru_cache(maxsize=None)
def simplex_grid(size, k):
    """All probability vectors of length ``size`` whose entries are multiples of ``1/k``.

    Rows are in lexicographic order of their integer numerators.
    """
    rows = [c for c in itertools.product(range(k + 1), repeat=size) if sum(c) == k]
    out = np.array(rows, dtype=float) / k
    out.flags.writeable = False
    return out


class _LawFamily:
    """Cartesian product of lattice slots; each slot is one probability vector."""

    def __init__(self, dims, k):
        self.dims = list(dims)
        self.grids = [simplex_grid(d, k) for d in self.dims]
        self.radix = [g.shape[0] for g in self.grids]
        self.count = int(np.prod(self.radix, dtype=object))

    def grid_chunk(self, start, stop):
        idx = np.arange(start, stop, dtype=np.int64)
        out = [None] * len(self.grids)
        # last slot varies fastest
        for s in range(len(self.grids) - 1, -1, -1):
            idx, digit = np.divmod(idx, self.radix[s])
            out[s] = self.grids[s][digit]
        return out

    def random_chunk(self, seed, start, stop):
        draws = [[] for _ in self.dims]
        for i in range(start, stop):
            rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
            for s, d in enumerate(self.dims):
                draws[s].append(rng.dirichlet(np.ones(d)))
        return [np.array(d).reshape(-1, dim) for d, dim in zip(draws, self.dims)]


def _chunks(family, cfg, cells):
    n_grid = family.count
    total = n_grid + cfg.random_samples
    if total > cfg.budget:
        raise BudgetError(f"sweep needs {total} law evaluations, budget is {cfg.budget}",
                          count=total, cap=cfg.budget)
    step = max(1, (1 << 20) // max(cells, 1))
    for start in range(0, n_grid, step):
        yield family.grid_chunk(start, min(start + step, n_grid))
    for start in range(0, cfg.random_samples, step):
        yield family.random_chunk(cfg.seed, start, min(start + step, cfg.random_samples))


def _stack(slots, first, count, d):
    return np.stack(slots[first:first + count], axis=1).reshape(-1, count, d)


def _inner_batches(ch, cfg):
    u, v1 = cfg.u_size, cfg.v1_size
    x1, x2 = ch.x1_size, ch.x2_size
    dims = [u] + [v1] * u + [x1] * v1 + [x2] * u
    family = _LawFamily(dims, cfg.k)
    cells = u * v1 * x1 * x2 * ch.y1_size * ch.y2_size
    for slots in _chunks(family, cfg, cells):
        p_u = slots[0]
        p_v1 = _stack(slots, 1, u, v1)
        p_x1 = _stack(slots, 1 + u, v1, x1)
        p_x2 = _stack(slots, 1 + u + v1, u, x2)
        table = np.einsum("nu,nuv,nva,nub,abij->nuvabij", p_u, p_v1, p_x1, p_x2, ch.law)
        yield _BatchInfo(table, info.INNER_VARS)


def _outer_batches(ch, cfg, u_size=None):
    u = cfg.u_size if u_size is None else u_size
    v1, v2 = cfg.v1_size, cfg.v2_size
    x1, x2 = ch.x1_size, ch.x2_size
    dims = [u] + [v1 * v2] * u + [x1] * v1 + [x2] * v2
    family = _LawFamily(dims, cfg.k)
    cells = u * v1 * v2 * x1 * x2 * ch.y1_size * ch.y2_size
    for slots in _chunks(family, cfg, cells):
        p_u = slots[0]
        # flattened (v1, v2) pairs, v1 fastest
        p_vv = _stack(slots, 1, u, v1 * v2).reshape(-1, u, v2, v1).transpose(0, 1, 3, 2)
        p_x1 = _stack(slots, 1 + u, v1, x1)
        p_x2 = _stack(slots, 1 + u + v1, v2, x2)
        table = np.einsum("nu,nuvw,nva,nwb,abij->nuvwabij", p_u, p_vv, p_x1, p_x2, ch.law)
        yield _BatchInfo(table, info.OUTER_VARS)


def _independent_v_batches(ch, cfg):
    v1, v2 = cfg.v1_size, cfg.v2_size
    x1, x2 = ch.x1_size, ch.x2_size
    dims = [v1, v2] + [x1] * v1 + [x2] * v2
    family = _LawFamily(dims, cfg.k)
    cells = v1 * v2 * x1 * x2 * ch.y1_size * ch.y2_size
    for slots in _chunks(family, cfg, cells):
        p_x1 = _stack(slots, 2, v1, x1)
        p_x2 = _stack(slots, 2 + v1, v2, x2)
        table = np.einsum("nv,nw,nva,nwb,abij->nvwabij", slots[0], slots[1], p_x1, p_x2, ch.law)
        yield _BatchInfo(table, ("V1", "V2", "X1", "X2", "Y1", "Y2"))


def _sweep(batches, formulas, coeffs):
    pts, n = [], 0
    for batch in batches:
        bounds = np.stack(formulas(batch.mi), axis=1)
        n += bounds.shape[0]
        p, _ = batch_vertices(coeffs, bounds)
        pts.append(p)
    return (np.concatenate(pts) if pts else np.empty((0, 3))), n


def _check_cfg_channel(ch):
    if not isinstance(ch, DmChannel):
        raise UsageError("expected a DmChannel")


def sweep_inner(ch: DmChannel, cfg: SweepConfig) -> RegionCloud:
    """Union of inner-bound polytopes over every lattice law (plus random samples)."""
    _check_cfg_channel(ch)
    pts, n = _sweep(_inner_batches(ch, cfg), _inner_formulas, INNER_COEFFS)
    meta = {"provenance": "thm2", "kind": "raw union", "sweep": cfg.as_dict(), "n_laws": n}
    return RegionCloud(pts, meta)


def sweep_outer(ch: DmChannel, cfg: SweepConfig) -> RegionCloud:
    """Union of outer-bound polytopes over the lattice; a sampled under-approximation."""
    _check_cfg_channel(ch)
    pts, n = _sweep(_outer_batches(ch, cfg), _outer_formulas, OUTER_COEFFS)
    meta = {"provenance": "thm1", "kind": "raw union", "label": SAMPLED_OUTER_LABEL,
            "sweep": cfg.as_dict(), "n_laws": n}
    return RegionCloud(pts, meta)


def sweep_less_noisy(ch: DmChannel, cfg: SweepConfig, mode="inner") -> RegionCloud:
    """Union of less-noisy polytopes: independent (inner) or joint (outer) V1, V2."""
    _check_cfg_channel(ch)
    if mode == "inner":
        batches, tag = _independent_v_batches(ch, cfg), "thm4"
    elif mode == "outer":
        batches, tag = _outer_batches(ch, cfg, u_size=1), "thm3"
    else:
        raise UsageError(f"mode must be 'inner' or 'outer', got {mode!r}")
    pts, n = _sweep(batches, _less_noisy_formulas, LESS_NOISY_COEFFS)
    meta = {"provenance": tag, "kind": "raw union", "sweep": cfg.as_dict(), "n_laws": n}
    if mode == "outer":
        meta["label"] = SAMPLED_OUTER_LABEL
    return RegionCloud(pts, meta)


# ---------------------------------------------------------------------------
# less-noisy condition

def _v2_joint(p_v2x2, p_x1, ch):
    """Joint of (V2, X1, X2, Y1, Y2) with X1 drawn independently from p_x1."""
    return np.einsum("...vb,a,abij->...vabij", p_v2x2, p_x1, ch.law)


def _v2_informations(p_v2x2, p_x1, ch):
    joint = info.JointPmf(("V2", "X1", "X2", "Y1", "Y2"), _v2_joint(p_v2x2, p_x1, ch))
    return (info.mutual_information(joint, "V2", "Y1"),
            info.mutual_information(joint, "V2", "Y2"))


def less_noisy_test(ch: DmChannel, p_x1=None, v2_size=2, cfg: Optional[SweepConfig] = None):
    """Search couplings p(v2, x2) for a strict violation of I(V2;Y1) >= I(V2;Y2).

    X1 is taken i.i.d. from ``p_x1`` (uniform by default), independent of
    (V2, X2). The search can only falsify: a clean scan is reported as
    ``no_counterexample_at_resolution``.
    """
    if v2_size < 1:
        raise UsageError("v2_size must be >= 1")
    cfg = cfg or SweepConfig()
    p_x1 = Pmf.uniform(ch.x1_size) if p_x1 is None else (p_x1 if isinstance(p_x1, Pmf) else Pmf(p_x1))
    if p_x1.support_size != ch.x1_size:
        raise ValidationError("p_x1 does not match the channel's X1 alphabet")
    d = v2_size * ch.x2_size
    family = _LawFamily([d], cfg.k)
    resolution = {
        "k": cfg.k, "random_samples": cfg.random_samples, "seed": cfg.seed,
        "v2_size": v2_size, "p_x1": p_x1.probs.tolist(),
        "assumption": "X1 i.i.d. from p_x1, independent of (V2, X2)",
    }
    scanned = 0
    for (flat,) in _chunks(family, cfg, d * ch.x1_size * ch.y1_size * ch.y2_size):
        tables = flat.reshape(-1, v2_size, ch.x2_size)
        batch = _BatchInfo(_v2_joint(tables, p_x1.probs, ch), ("V2", "X1", "X2", "Y1", "Y2"))
        gap = batch.mi("V2", "Y1") - batch.mi("V2", "Y2")
        for i in np.flatnonzero(gap < -VIOLATION_TOL):
            i1, i2 = _v2_informations(tables[i], p_x1.probs, ch)
            if i1 < i2 - VIOLATION_TOL:
                resolution["laws_scanned"] = scanned + int(i) + 1
                witness = {"p_v2_x2": tables[i].tolist(), "I_V2_Y1": i1, "I_V2_Y2": i2}
                return LessNoisyVerdict("counterexample_found", witness, resolution)
        scanned += tables.shape[0]
    resolution["laws_scanned"] = scanned
    return LessNoisyVerdict("no_counterexample_at_resolution", None, resolution)


def random_inner_law(rng, sizes, ch):
    """Uniform-Dirichlet auxiliary chain; handy for property tests."""
    u, v1 = sizes
    return InnerAuxLaw(
        Pmf(rng.dirichlet(np.ones(u))),
        ConditionalPmf(rng.dirichlet(np.ones(v1), size=u)),
        ConditionalPmf(rng.dirichlet(np.ones(ch.x1_size), size=v1)),
        ConditionalPmf(rng.dirichlet(np.ones(ch.x2_size), size=u)),
    )


def random_outer_law(rng, sizes, ch):
    u, v1, v2 = sizes
    return OuterAuxLaw(
        Pmf(rng.dirichlet(np.ones(u))),
        ConditionalPmf(rng.dirichlet(np.ones(v1 * v2), size=u)),
        ConditionalPmf(rng.dirichlet(np.ones(ch.x1_size), size=v1)),
        ConditionalPmf(rng.dirichlet(np.ones(ch.x2_size), size=v2)),
    )
