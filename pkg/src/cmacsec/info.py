"""
Finite-alphabet probability tables and information measures.

All quantities are in bits. Distributions are validated on construction
(non-negative entries, unit mass within ``PROB_TOL``) and never silently
renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UsageError, ValidationError

PROB_TOL = 1e-9
MI_CLAMP = 1e-9

INNER_VARS = ("U", "V1", "X1", "X2", "Y1", "Y2")
OUTER_VARS = ("U", "V1", "V2", "X1", "X2", "Y1", "Y2")


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


def _check_simplex(arr, what, axis=-1):
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{what}: non-finite entry")
    if np.any(arr < 0):
        raise ValidationError(f"{what}: negative probability {arr.min()!r}")
    sums = arr.sum(axis=axis)
    bad = np.abs(sums - 1.0) > PROB_TOL
    if np.any(bad):
        where = np.argwhere(np.atleast_1d(bad))[0]
        raise ValidationError(
            f"{what}: mass {np.atleast_1d(sums)[tuple(where)]!r} at {tuple(where.tolist())} "
            f"is not 1 within {PROB_TOL}")


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on ``{0, ..., support_size - 1}``."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.probs)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("Pmf needs a non-empty 1-D vector")
        _check_simplex(arr, "Pmf")
        object.__setattr__(self, "probs", arr)

    @property
    def support_size(self):
        return self.probs.size

    @classmethod
    def uniform(cls, n):
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point(cls, n, index):
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)


@dataclass(frozen=True)
class ConditionalPmf:
    """Row-stochastic matrix; row ``g`` is the law of the output given ``g``."""

    rows: np.ndarray

    def __post_init__(self):
        arr = self.rows
        if isinstance(arr, (list, tuple)) and arr and isinstance(arr[0], Pmf):
            arr = [r.probs for r in arr]
        arr = _frozen(arr)
        if arr.ndim != 2 or arr.size == 0:
            raise ValidationError("ConditionalPmf needs a non-empty 2-D table")
        _check_simplex(arr, "ConditionalPmf row")
        object.__setattr__(self, "rows", arr)

    @property
    def given_size(self):
        return self.rows.shape[0]

    @property
    def out_size(self):
        return self.rows.shape[1]

    def row(self, g):
        return Pmf(self.rows[g])

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @classmethod
    def constant(cls, given_size, pmf):
        pmf = pmf if isinstance(pmf, Pmf) else Pmf(pmf)
        return cls(np.tile(pmf.probs, (given_size, 1)))


@dataclass(frozen=True)
class DmChannel:
    """Two-input two-output discrete memoryless channel.

    ``law[x1, x2, y1, y2] = p(y1, y2 | x1, x2)``.
    """

    law: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.law)
        if arr.ndim != 4 or arr.size == 0:
            raise ValidationError("channel law must be indexed [x1][x2][y1][y2]")
        flat = arr.reshape(arr.shape[0], arr.shape[1], -1)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationError("channel law has a negative or non-finite entry")
        sums = flat.sum(axis=-1)
        bad = np.argwhere(np.abs(sums - 1.0) > PROB_TOL)
        if bad.size:
            x1, x2 = bad[0]
            raise ValidationError(
                f"channel slice (x1={x1}, x2={x2}) sums to {float(sums[x1, x2]):.12g}, not 1")
        object.__setattr__(self, "law", arr)

    @property
    def x1_size(self):
        return self.law.shape[0]

    @property
    def x2_size(self):
        return self.law.shape[1]

    @property
    def y1_size(self):
        return self.law.shape[2]

    @property
    def y2_size(self):
        return self.law.shape[3]

    @property
    def y1_law(self):
        """p(y1 | x1, x2) as an array indexed [x1, x2, y1]."""
        return self.law.sum(axis=3)

    @property
    def y2_law(self):
        """p(y2 | x1, x2) as an array indexed [x1, x2, y2]."""
        return self.law.sum(axis=2)

    @classmethod
    def from_components(cls, p_y1, p_y2):
        """Channel whose outputs are conditionally independent given the inputs.

        ``p_y1[x1, x2, y1]`` and ``p_y2[x1, x2, y2]``.
        """
        p_y1 = np.asarray(p_y1, dtype=float)
        p_y2 = np.asarray(p_y2, dtype=float)
        return cls(np.einsum("abi,abj->abij", p_y1, p_y2))


@dataclass(frozen=True)
class JointPmf:
    """Joint law over named finite variables; ``table`` has one axis per name."""

    var_names: tuple
    table: np.ndarray

    def __post_init__(self):
        names = tuple(self.var_names)
        arr = _frozen(self.table)
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate variable names {names}")
        if arr.ndim != len(names):
            raise ValidationError(
                f"table has {arr.ndim} axes for {len(names)} variables")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationError("joint table has a negative or non-finite entry")
        if abs(arr.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"joint table mass {arr.sum()!r} is not 1")
        object.__setattr__(self, "var_names", names)
        object.__setattr__(self, "table", arr)

    @property
    def sizes(self):
        return self.table.shape

    @property
    def probs(self):
        """Flat view of the table, last variable fastest."""
        return self.table.reshape(-1)

    def axis(self, name):
        try:
            return self.var_names.index(name)
        except ValueError:
            raise UsageError(f"unknown variable {name!r}; have {self.var_names}") from None


@dataclass(frozen=True)
class InnerAuxLaw:
    """Auxiliary chain p(u) p(v1|u) p(x1|v1) p(x2|u) for the inner bound."""

    p_u: Pmf
    p_v1_given_u: ConditionalPmf
    p_x1_given_v1: ConditionalPmf
    p_x2_given_u: ConditionalPmf

    def __post_init__(self):
        u = self.p_u.support_size
        if self.p_v1_given_u.given_size != u:
            raise ValidationError("p(v1|u) needs one row per u")
        if self.p_x1_given_v1.given_size != self.p_v1_given_u.out_size:
            raise ValidationError("p(x1|v1) needs one row per v1")
        if self.p_x2_given_u.given_size != u:
            raise ValidationError("p(x2|u) needs one row per u")

    @property
    def sizes(self):
        return (self.p_u.support_size, self.p_v1_given_u.out_size,
                self.p_x1_given_v1.out_size, self.p_x2_given_u.out_size)


@dataclass(frozen=True)
class OuterAuxLaw:
    """Auxiliary chain p(u) p(v1,v2|u) p(x1|v1) p(x2|v2) for the outer bound.

    Rows of ``p_v1v2_given_u`` range over the flattened pair ``(v1, v2)``
    with v1 varying fastest: column ``v2 * |V1| + v1``.
    """

    p_u: Pmf
    p_v1v2_given_u: ConditionalPmf
    p_x1_given_v1: ConditionalPmf
    p_x2_given_v2: ConditionalPmf

    def __post_init__(self):
        if self.p_v1v2_given_u.given_size != self.p_u.support_size:
            raise ValidationError("p(v1,v2|u) needs one row per u")
        if self.p_v1v2_given_u.out_size != self.v1_size * self.v2_size:
            raise ValidationError(
                f"p(v1,v2|u) rows have {self.p_v1v2_given_u.out_size} entries, "
                f"expected |V1|*|V2| = {self.v1_size * self.v2_size}")

    @property
    def v1_size(self):
        return self.p_x1_given_v1.given_size

    @property
    def v2_size(self):
        return self.p_x2_given_v2.given_size

    def v1v2_table(self):
        """p(v1, v2 | u) reshaped to ``[u, v1, v2]``."""
        u = self.p_u.support_size
        return self.p_v1v2_given_u.rows.reshape(u, self.v2_size, self.v1_size).transpose(0, 2, 1)

    @classmethod
    def from_table(cls, p_u, p_v1v2_given_u, p_x1_given_v1, p_x2_given_v2):
        """Build from a ``[u, v1, v2]`` array instead of flattened rows."""
        t = np.asarray(p_v1v2_given_u, dtype=float)
        rows = t.transpose(0, 2, 1).reshape(t.shape[0], -1)
        cond = lambda c: c if isinstance(c, ConditionalPmf) else ConditionalPmf(c)
        return cls(_as_pmf(p_u), ConditionalPmf(rows), cond(p_x1_given_v1), cond(p_x2_given_v2))


def _as_pmf(p):
    return p if isinstance(p, Pmf) else Pmf(p)


def _entropy_of_array(arr):
    p = arr[arr > 0]
    return float(-np.sum(p * np.log2(p)))


def entropy(p):
    """Shannon entropy in bits, with 0 log 0 = 0."""
    return _entropy_of_array(_as_pmf(p).probs)


def _labels(joint, labels):
    if isinstance(labels, str):
        labels = (labels,)
    labels = tuple(labels)
    for name in labels:
        joint.axis(name)
    return labels


def _marginal_entropy(joint, labels):
    if not labels:
        return 0.0
    drop = tuple(i for i, n in enumerate(joint.var_names) if n not in labels)
    return _entropy_of_array(joint.table.sum(axis=drop))


def conditional_mutual_information(joint, a, b, c=()):
    """I(A;B|C) in bits; each argument is a label or a sequence of labels.

    Uses I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped at 0.
    """
    a, b, c = _labels(joint, a), _labels(joint, b), _labels(joint, c)
    if not a or not b:
        raise UsageError("both information arguments need at least one label")
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise UsageError(f"label groups must be disjoint: {a}, {b}, {c}")
    h = _marginal_entropy
    value = (h(joint, set(a) | set(c)) + h(joint, set(b) | set(c))
             - h(joint, set(a) | set(b) | set(c)) - h(joint, set(c)))
    return max(value, 0.0)


def mutual_information(joint, a, b):
    """I(A;B) = H(A) + H(B) - H(A,B) in bits, clamped at 0."""
    return conditional_mutual_information(joint, a, b, ())


def marginalize(joint, keep):
    """Sum out every variable not in ``keep``; axes follow the order of ``keep``."""
    keep = _labels(joint, keep)
    if not keep:
        raise UsageError("keep must name at least one variable")
    if len(set(keep)) != len(keep):
        raise UsageError(f"duplicate labels in {keep}")
    drop = tuple(i for i, n in enumerate(joint.var_names) if n not in keep)
    table = joint.table.sum(axis=drop)
    kept_order = [n for n in joint.var_names if n in keep]
    perm = [kept_order.index(n) for n in keep]
    return JointPmf(keep, table.transpose(perm))


def _check_channel_fit(x1_size, x2_size, ch):
    if (x1_size, x2_size) != (ch.x1_size, ch.x2_size):
        raise ValidationError(
            f"auxiliary law produces inputs of sizes ({x1_size}, {x2_size}); "
            f"channel expects ({ch.x1_size}, {ch.x2_size})")


def build_inner_law(aux: InnerAuxLaw, ch: DmChannel) -> JointPmf:
    """Joint law of (U, V1, X1, X2, Y1, Y2) under p(u)p(v1|u)p(x1|v1)p(x2|u)p(y1,y2|x1,x2)."""
    _check_channel_fit(aux.p_x1_given_v1.out_size, aux.p_x2_given_u.out_size, ch)
    table = np.einsum("u,uv,va,ub,abij->uvabij", aux.p_u.probs, aux.p_v1_given_u.rows,
                      aux.p_x1_given_v1.rows, aux.p_x2_given_u.rows, ch.law)
    return JointPmf(INNER_VARS, table)


def build_outer_law(aux: OuterAuxLaw, ch: DmChannel) -> JointPmf:
    """Joint law of (U, V1, V2, X1, X2, Y1, Y2) under p(u)p(v1,v2|u)p(x1|v1)p(x2|v2)p(y1,y2|x1,x2)."""
    _check_channel_fit(aux.p_x1_given_v1.out_size, aux.p_x2_given_v2.out_size, ch)
    table = np.einsum("u,uvw,va,wb,abij->uvwabij", aux.p_u.probs, aux.v1v2_table(),
                      aux.p_x1_given_v1.rows, aux.p_x2_given_v2.rows, ch.law)
    return JointPmf(OUTER_VARS, table)


def product_joint(names: Sequence[str], factors: Iterable) -> JointPmf:
    """Joint law of independent variables with the given marginals."""
    table = np.ones(())
    for f in factors:
        table = np.multiply.outer(table, _as_pmf(f).probs)
    return JointPmf(tuple(names), table)
