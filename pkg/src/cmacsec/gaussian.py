"""
Closed-form rate regions for the two-user Gaussian compound MAC.

Receiver k sees ``Y_k = sqrt(a1) X1 + sqrt(a2) X2 + N_k`` with unit-variance
real noise, where (a1, a2) = (h1, h2) for receiver 1 and (g1, g2) for
receiver 2. Each transmitter splits its power between a common layer
(``p_u1``, ``p_u2``), coherently combined across transmitters, and a
private layer (``p_uprime``, ``p_udprime``).

Two regions are provided: the secrecy inner bound, where receiver 2 must
stay ignorant of transmitter 1's private message, and the compound MAC
capacity region, where both receivers decode everything.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import UsageError, ValidationError
from .region import RegionCloud, ConstraintSet, batch_vertices, _axis_index

CMACCM = "cmaccm_inner"
COMPOUND = "compound_capacity"
_MODE_ALIASES = {"cmaccm": CMACCM, CMACCM: CMACCM, "compound": COMPOUND, COMPOUND: COMPOUND}

# rows: R1, R2, R0+R2, R1+R2, R0+R1+R2
CMACCM_COEFFS = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]])
# rows: R1, R2, R1+R2, R0+R1+R2
COMPOUND_COEFFS = np.array([[0, 1, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1]])

BUDGET_TOL = 1e-12


def normalize_mode(mode):
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise UsageError(f"unknown mode {mode!r}; use 'cmaccm' or 'compound'") from None


@dataclass(frozen=True)
class GaussianParams:
    h1: float
    h2: float
    g1: float
    g2: float
    p1: float
    p2: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be a finite non-negative number, got {value!r}")

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(**{k: float(d[k]) for k in ("h1", "h2", "g1", "g2", "p1", "p2")})
        except KeyError as exc:
            raise ValidationError(f"missing parameter {exc.args[0]!r}") from None


@dataclass(frozen=True)
class PowerSplit:
    p_u1: float
    p_uprime: float
    p_u2: float
    p_udprime: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be non-negative, got {value!r}")

    def check(self, gp: GaussianParams):
        if self.p_u1 + self.p_uprime > gp.p1 + BUDGET_TOL:
            raise ValidationError(f"transmitter 1 split {self.p_u1} + {self.p_uprime} exceeds P1={gp.p1}")
        if self.p_u2 + self.p_udprime > gp.p2 + BUDGET_TOL:
            raise ValidationError(f"transmitter 2 split {self.p_u2} + {self.p_udprime} exceeds P2={gp.p2}")


@dataclass(frozen=True)
class GaussianSweepConfig:
    steps: int = 21
    mode: str = CMACCM

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValidationError("steps must be an integer >= 2")
        object.__setattr__(self, "mode", normalize_mode(self.mode))


def c_fn(x):
    """Real-signalling Gaussian rate ``0.5 * log2(1 + x)`` in bits."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0):
        raise ValidationError(f"C(x) is defined for x >= 0, got {x!r}")
    out = 0.5 * np.log2(1.0 + arr)
    return float(out) if out.ndim == 0 else out


def _cmaccm_bounds(gp, pu1, pup, pu2, pudp):
    pu1, pup, pu2, pudp = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (pu1, pup, pu2, pudp)))
    p1 = pu1 + pup
    p2 = pu2 + pudp
    leak = c_fn(gp.g1 * pup)
    coh_g = gp.g1 * pu1 + gp.g2 * p2 + 2.0 * np.sqrt(gp.g1 * gp.g2 * pu1 * pu2)
    coh_h = gp.h1 * p1 + gp.h2 * p2 + 2.0 * np.sqrt(gp.h1 * gp.h2 * pu1 * pu2)
    r1 = c_fn(gp.h1 * pup) - leak
    r2 = np.minimum(c_fn(gp.h2 * pudp), c_fn(gp.g2 * pudp / (1.0 + gp.g1 * pup)))
    r02 = c_fn(coh_g / (1.0 + gp.g1 * pup))
    r12 = c_fn(gp.h1 * pup + gp.h2 * pudp) - leak
    r012 = c_fn(coh_h) - leak
    return np.maximum(np.stack([r1, r2, r02, r12, r012], axis=-1), 0.0)


def _compound_bounds(gp, pu1, pup, pu2, pudp):
    pu1, pup, pu2, pudp = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (pu1, pup, pu2, pudp)))
    p1 = pu1 + pup
    p2 = pu2 + pudp
    coh_h = gp.h1 * p1 + gp.h2 * p2 + 2.0 * np.sqrt(gp.h1 * gp.h2 * pu1 * pu2)
    coh_g = gp.g1 * p1 + gp.g2 * p2 + 2.0 * np.sqrt(gp.g1 * gp.g2 * pu1 * pu2)
    r1 = np.minimum(c_fn(gp.h1 * pup), c_fn(gp.g1 * pup))
    r2 = np.minimum(c_fn(gp.h2 * pudp), c_fn(gp.g2 * pudp))
    r12 = np.minimum(c_fn(gp.h1 * pup + gp.h2 * pudp), c_fn(gp.g1 * pup + gp.g2 * pudp))
    r012 = np.minimum(c_fn(coh_h), c_fn(coh_g))
    return np.maximum(np.stack([r1, r2, r12, r012], axis=-1), 0.0)


_MODES = {
    CMACCM: (_cmaccm_bounds, CMACCM_COEFFS, "thm5"),
    COMPOUND: (_compound_bounds, COMPOUND_COEFFS, "thm6"),
}


def _split_args(ps):
    return ps.p_u1, ps.p_uprime, ps.p_u2, ps.p_udprime


def cmaccm_inner_constraints(gp: GaussianParams, ps: PowerSplit) -> ConstraintSet:
    """Secrecy inner-bound constraints at one power split."""
    ps.check(gp)
    return ConstraintSet(CMACCM_COEFFS, _cmaccm_bounds(gp, *_split_args(ps)), "thm5")


def compound_capacity_constraints(gp: GaussianParams, ps: PowerSplit) -> ConstraintSet:
    """Compound MAC capacity constraints at one power split."""
    ps.check(gp)
    return ConstraintSet(COMPOUND_COEFFS, _compound_bounds(gp, *_split_args(ps)), "thm6")


def _split_grid(total, steps):
    """Points (common, private) with ``common + private <= total`` on a ``steps`` lattice."""
    i, j = np.meshgrid(np.arange(steps), np.arange(steps), indexing="ij")
    keep = i + j <= steps - 1
    frac = 1.0 / (steps - 1)
    return total * i[keep] * frac, total * j[keep] * frac


def split_grid(gp: GaussianParams, steps: int):
    """All pairs of per-transmitter splits, as four flat arrays (p_u1, p_uprime, p_u2, p_udprime)."""
    a1, b1 = _split_grid(gp.p1, steps)
    a2, b2 = _split_grid(gp.p2, steps)
    k1, k2 = np.meshgrid(np.arange(a1.size), np.arange(a2.size), indexing="ij")
    k1, k2 = k1.ravel(), k2.ravel()
    return a1[k1], b1[k1], a2[k2], b2[k2]


def split_bounds(gp: GaussianParams, mode, splits):
    """Right-hand sides for many power splits at once.

    Parameters
    ----------
    gp : GaussianParams
    mode : str
        ``"cmaccm"`` or ``"compound"`` (or the long mode names).
    splits : tuple of four arrays
        ``(p_u1, p_uprime, p_u2, p_udprime)``, for example from :func:`split_grid`.

    Returns
    -------
    coeffs : (k, 3) array
        Constraint rows shared by every split.
    bounds : (B, k) array
        One row of bounds per split.
    """
    bounds_fn, coeffs, _ = _MODES[normalize_mode(mode)]
    return np.asarray(coeffs), bounds_fn(gp, *splits)


def sweep_gaussian(gp: GaussianParams, cfg: GaussianSweepConfig) -> RegionCloud:
    """Union over the power-split lattice of the corner points of each region instance."""
    _, coeffs, tag = _MODES[cfg.mode]
    bounds = split_bounds(gp, cfg.mode, split_grid(gp, cfg.steps))[1]
    points, _ = batch_vertices(coeffs, bounds)
    meta = {
        "provenance": tag,
        "mode": cfg.mode,
        "steps": cfg.steps,
        "params": asdict(gp),
        "n_splits": int(bounds.shape[0]),
        "kind": "raw union",
    }
    return RegionCloud(points, meta)


def _closed_form_max(gp, mode, axis):
    coh_h = gp.h1 * gp.p1 + gp.h2 * gp.p2 + 2.0 * np.sqrt(gp.h1 * gp.h2 * gp.p1 * gp.p2)
    coh_g = gp.g1 * gp.p1 + gp.g2 * gp.p2 + 2.0 * np.sqrt(gp.g1 * gp.g2 * gp.p1 * gp.p2)
    if axis == 0:
        # all power in the common layers
        return min(c_fn(coh_h), c_fn(coh_g))
    if axis == 2:
        # all of transmitter 2's power private, transmitter 1 silent on its private layer
        return min(c_fn(gp.h2 * gp.p2), c_fn(gp.g2 * gp.p2))
    if mode == CMACCM:
        # C(h1 P) - C(g1 P) is increasing in P when h1 > g1, and <= 0 otherwise
        return max(c_fn(gp.h1 * gp.p1) - c_fn(gp.g1 * gp.p1), 0.0)
    return min(c_fn(gp.h1 * gp.p1), c_fn(gp.g1 * gp.p1))


def _swept_axis_max(gp, mode, axis, steps):
    bounds_fn, coeffs, _ = _MODES[mode]
    b = bounds_fn(gp, *split_grid(gp, steps))
    return float(b[:, coeffs[:, axis] == 1].min(axis=1).max())


def max_rate(gp: GaussianParams, mode, axis, check_steps=41) -> float:
    """Largest single rate over the whole power-split polytope.

    The closed-form boundary value is returned after checking that no point
    of a ``check_steps`` lattice beats it.
    """
    mode = normalize_mode(mode)
    idx = _axis_index(axis)
    value = float(_closed_form_max(gp, mode, idx))
    swept = _swept_axis_max(gp, mode, idx, check_steps)
    if swept > value + 1e-9:
        raise RuntimeError(f"lattice value {swept} exceeds closed-form maximum {value} on {axis}")
    return value
