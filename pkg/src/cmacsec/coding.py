"""
Desk-scale random binning code for the compound MAC with a confidential message.

Transmitter 1 holds a superposition codebook: cloud centres ``u^n(w0)`` and,
per cloud, ``m1`` bins of ``L`` satellite words ``v1^n(w0, w1, l)``. It sends
``w1`` by picking ``l`` uniformly inside bin ``w1`` and passing the satellite
through the memoryless map p(x1|v1). Transmitter 2 sends the deterministic
word ``x2^n(w0, w2)``. Both receivers run exhaustive joint-typicality
decoders; receiver 2 is also the eavesdropper whose equivocation about
``w1`` is computed exactly by enumerating every output sequence.

Message and bin indices are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import info
from .errors import BudgetError, DecodeError, GenerationError, UsageError, ValidationError
from .info import DmChannel, InnerAuxLaw

DEFAULT_ATTEMPTS = 1000
DEFAULT_EQUIVOCATION_BUDGET = 1 << 24

_LAYER_IDS = {"u": 0, "v1": 1, "x2": 2}


@dataclass(frozen=True)
class SimConfig:
    n: int
    m0: int = 1
    m1: int = 2
    m2: int = 1
    bin_size: Union[int, str] = 1
    eps_typ: float = 0.5
    trials: int = 1000
    seed: int = 0
    max_attempts: int = DEFAULT_ATTEMPTS
    equivocation_budget: int = DEFAULT_EQUIVOCATION_BUDGET

    def __post_init__(self):
        for name in ("n", "m0", "m1", "m2", "trials", "max_attempts"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if self.bin_size != "auto" and int(self.bin_size) < 1:
            raise ValidationError("bin_size must be >= 1 or 'auto'")
        if not self.eps_typ > 0:
            raise ValidationError("eps_typ must be positive")

    @classmethod
    def from_dict(cls, d):
        known = {"n", "m0", "m1", "m2", "L", "bin_size", "eps_typ", "trials", "seed",
                 "max_attempts", "equivocation_budget"}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown sim-config keys {sorted(unknown)}")
        kw = {k: v for k, v in d.items() if k != "L"}
        if "L" in d:
            kw["bin_size"] = d["L"]
        if "n" not in kw:
            raise ValidationError("sim-config needs 'n'")
        return cls(**kw)

    def as_dict(self):
        return {"n": self.n, "m0": self.m0, "m1": self.m1, "m2": self.m2, "L": self.bin_size,
                "eps_typ": self.eps_typ, "trials": self.trials, "seed": self.seed}

    @property
    def rates(self):
        """(R0, R1, R2) in bits per channel use."""
        return tuple(math.log2(m) / self.n for m in (self.m0, self.m1, self.m2))


def resolve_bin_size(cfg: SimConfig, law: InnerAuxLaw, ch: DmChannel) -> SimConfig:
    """Replace ``bin_size="auto"`` by round(2^(n I(V1;Y2|X2,U))), at least 1."""
    if cfg.bin_size != "auto":
        return cfg
    joint = info.build_inner_law(law, ch)
    leak = info.conditional_mutual_information(joint, "V1", "Y2", ("X2", "U"))
    size = max(1, int(round(2.0 ** (cfg.n * leak))))
    return SimConfig(**{**cfg.__dict__, "bin_size": size})


def is_typical(indices, probs, eps):
    """Strong typicality of a sequence of joint-letter indices.

    Every letter frequency must lie within ``eps * p(a) + eps / |A|`` of
    ``p(a)`` and letters of probability zero must not occur at all.
    """
    probs = np.asarray(probs, dtype=float).ravel()
    counts = np.bincount(np.asarray(indices).ravel(), minlength=probs.size)
    return bool(_typical_counts(counts, probs, len(indices), eps))


def _typical_counts(counts, probs, n, eps):
    freq = counts / n
    slack = eps * probs + eps / probs.size
    ok = np.all(np.abs(freq - probs) <= slack + 1e-12, axis=-1)
    return ok & np.all((counts == 0) | (probs > 0), axis=-1)


def _sample_rows(rng, rows, given):
    """One draw per position from ``rows[given[i]]`` by inverse CDF."""
    cdf = np.cumsum(rows, axis=1)
    cdf[:, -1] = 1.0
    r = rng.random(len(given))
    return np.argmax(r[:, None] < cdf[given], axis=1)


def _word_rng(seed, layer, *index):
    return np.random.default_rng(np.random.SeedSequence([seed, _LAYER_IDS[layer], *index]))


@dataclass(frozen=True, eq=False)
class Codebook:
    """Three-layer binned random code.

    ``u_words[w0]``, ``v1_words[w0, w1, l]`` and ``x2_words[w0, w2]`` are
    length-``n`` integer sequences.
    """

    u_words: np.ndarray
    v1_words: np.ndarray
    x2_words: np.ndarray
    law: InnerAuxLaw
    seed: int
    eps_typ: float

    @property
    def n(self):
        return self.u_words.shape[1]

    @property
    def m0(self):
        return self.u_words.shape[0]

    @property
    def m1(self):
        return self.v1_words.shape[1]

    @property
    def bin_size(self):
        return self.v1_words.shape[2]

    @property
    def m2(self):
        return self.x2_words.shape[1]

    def to_dict(self):
        return {"seed": self.seed, "eps_typ": self.eps_typ,
                "u_words": self.u_words.tolist(), "v1_words": self.v1_words.tolist(),
                "x2_words": self.x2_words.tolist()}

    def to_bytes(self):
        return b"".join(a.astype(np.int64).tobytes() for a in (self.u_words, self.v1_words, self.x2_words))


def _draw_typical(rng, sample, joint_index, probs, eps, attempts, layer, where):
    for _ in range(attempts):
        seq = sample(rng)
        if is_typical(joint_index(seq), probs, eps):
            return seq
    raise GenerationError(
        f"no typical {layer} word for {where} after {attempts} attempts; "
        f"the law is too peaked for eps={eps} at this blocklength", layer=layer)


def generate_codebook(law: InnerAuxLaw, cfg: SimConfig) -> Codebook:
    """Draw every codeword i.i.d. from its (conditional) law, rejecting atypical words.

    Each word has its own generator seeded from (seed, layer, indices), so the
    codebook does not depend on generation order and bins of size L are a
    prefix of bins of any larger size.
    """
    if cfg.bin_size == "auto":
        raise UsageError("resolve bin_size='auto' with resolve_bin_size first")
    n, L, eps, cap = cfg.n, int(cfg.bin_size), cfg.eps_typ, cfg.max_attempts
    nu, nv, _, nx2 = law.sizes
    p_u = law.p_u.probs
    p_uv = p_u[:, None] * law.p_v1_given_u.rows
    p_ux2 = p_u[:, None] * law.p_x2_given_u.rows
    u_rows = p_u[None, :]

    u_words = np.empty((cfg.m0, n), dtype=np.int64)
    v1_words = np.empty((cfg.m0, cfg.m1, L, n), dtype=np.int64)
    x2_words = np.empty((cfg.m0, cfg.m2, n), dtype=np.int64)
    for w0 in range(cfg.m0):
        u = _draw_typical(_word_rng(cfg.seed, "u", w0),
                          lambda rng: _sample_rows(rng, u_rows, np.zeros(n, dtype=int)),
                          lambda s: s, p_u, eps, cap, "u", f"w0={w0}")
        u_words[w0] = u
        for w1 in range(cfg.m1):
            for l in range(L):
                v1_words[w0, w1, l] = _draw_typical(
                    _word_rng(cfg.seed, "v1", w0, w1, l),
                    lambda rng: _sample_rows(rng, law.p_v1_given_u.rows, u),
                    lambda s: u * nv + s, p_uv, eps, cap, "v1", f"(w0={w0}, w1={w1}, l={l})")
        for w2 in range(cfg.m2):
            x2_words[w0, w2] = _draw_typical(
                _word_rng(cfg.seed, "x2", w0, w2),
                lambda rng: _sample_rows(rng, law.p_x2_given_u.rows, u),
                lambda s: u * nx2 + s, p_ux2, eps, cap, "x2", f"(w0={w0}, w2={w2})")
    for arr in (u_words, v1_words, x2_words):
        arr.flags.writeable = False
    return Codebook(u_words, v1_words, x2_words, law, cfg.seed, eps)


def _check_index(name, value, size):
    if not 0 <= int(value) < size:
        raise UsageError(f"{name}={value} out of range [0, {size})")


def encode1(cb: Codebook, w0, w1, seed):
    """Stochastic encoder of transmitter 1; returns ``(x1, l)``."""
    _check_index("w0", w0, cb.m0)
    _check_index("w1", w1, cb.m1)
    rng = np.random.default_rng(seed)
    l = int(rng.integers(cb.bin_size))
    v1 = cb.v1_words[w0, w1, l]
    return _sample_rows(rng, cb.law.p_x1_given_v1.rows, v1), l


def encode2(cb: Codebook, w0, w2):
    """Deterministic encoder of transmitter 2."""
    _check_index("w0", w0, cb.m0)
    _check_index("w2", w2, cb.m2)
    return cb.x2_words[w0, w2].copy()


def transmit(ch: DmChannel, x1, x2, seed):
    """Pass two input sequences through the memoryless channel; returns ``(y1, y2)``."""
    x1 = np.asarray(x1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    if x1.ndim != 1 or x1.shape != x2.shape or x1.size == 0:
        raise UsageError("x1 and x2 must be non-empty sequences of equal length")
    if x1.min() < 0 or x1.max() >= ch.x1_size or x2.min() < 0 or x2.max() >= ch.x2_size:
        raise UsageError("input symbol outside the channel alphabet")
    rng = np.random.default_rng(seed)
    rows = ch.law.reshape(ch.x1_size * ch.x2_size, -1)
    joint = _sample_rows(rng, rows, x1 * ch.x2_size + x2)
    return joint // ch.y2_size, joint % ch.y2_size


class _Decoders:
    """Target laws and flattened codeword indices, computed once per (codebook, channel)."""

    def __init__(self, cb, ch):
        joint = info.build_inner_law(cb.law, ch)
        self.p1 = info.marginalize(joint, ("U", "V1", "X2", "Y1")).probs
        self.p2 = info.marginalize(joint, ("U", "X2", "Y2")).probs
        nu, nv, _, nx2 = cb.law.sizes
        self.ny1, self.ny2 = ch.y1_size, ch.y2_size
        u = cb.u_words[:, None, None, None, :]
        v1 = cb.v1_words[:, :, :, None, :]
        x2 = cb.x2_words[:, None, None, :, :]
        # joint letter index of (u, v1, x2) for every (w0, w1, l, w2) and position
        self.base1 = ((u * nv + v1) * nx2 + x2) * self.ny1
        self.base2 = (cb.u_words[:, None, :] * nx2 + cb.x2_words) * self.ny2
        self.eps = cb.eps_typ


def _decoders(cb, ch):
    cache = cb.__dict__.setdefault("_decoder_cache", {})
    key = id(ch)
    if key not in cache or cache[key][0] is not ch:
        cache[key] = (ch, _Decoders(cb, ch))
    return cache[key][1]


def _typical_mask(indices, probs, eps):
    a = probs.size
    flat = indices.reshape(-1, indices.shape[-1])
    c = np.zeros((flat.shape[0], a), dtype=np.int64)
    rows = np.repeat(np.arange(flat.shape[0]), flat.shape[1])
    np.add.at(c, (rows, flat.ravel()), 1)
    counts = c.reshape(indices.shape[:-1] + (a,))
    return _typical_counts(counts, probs, indices.shape[-1], eps)


def _unique_hit(mask):
    hits = np.argwhere(mask)
    if len(hits) == 0:
        raise DecodeError("no_hit")
    if len(hits) > 1:
        raise DecodeError("ambiguous", [tuple(map(int, h)) for h in hits])
    return tuple(int(v) for v in hits[0])


def decode1(cb: Codebook, y1, ch: DmChannel, eps_typ=None, *, _dec=None):
    """Receiver 1: the unique (w0, w1, w2) with some l jointly typical with ``y1``.

    The target law is the codebook's generating law composed with ``ch``;
    ``eps_typ`` defaults to the slack the codebook was generated with.
    Raises DecodeError with reason ``no_hit`` or ``ambiguous``.
    """
    dec = _dec or _decoders(cb, ch)
    eps = dec.eps if eps_typ is None else eps_typ
    y1 = _check_output(y1, cb.n, dec.ny1)
    mask = _typical_mask(dec.base1 + y1, dec.p1, eps)  # (m0, m1, L, m2)
    return _unique_hit(mask.any(axis=2))


def decode2(cb: Codebook, y2, ch: DmChannel, eps_typ=None, *, _dec=None):
    """Receiver 2: the unique (w0, w2) jointly typical with ``y2``."""
    dec = _dec or _decoders(cb, ch)
    eps = dec.eps if eps_typ is None else eps_typ
    y2 = _check_output(y2, cb.n, dec.ny2)
    mask = _typical_mask(dec.base2 + y2, dec.p2, eps)  # (m0, m2)
    return _unique_hit(mask)


def _check_output(y, n, size):
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (n,):
        raise UsageError(f"received sequence must have length {n}")
    if y.min() < 0 or y.max() >= size:
        raise UsageError("received symbol outside the output alphabet")
    return y


@dataclass
class SimReport:
    pe_estimate: float = float("nan")
    pe_ci: float = float("nan")
    equivocation_per_symbol: float = float("nan")
    leakage: float = float("nan")
    method: str = "exact"
    rates: tuple = ()
    config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "pe_estimate": self.pe_estimate,
            "pe_ci": self.pe_ci,
            "equivocation_per_symbol": self.equivocation_per_symbol,
            "leakage": self.leakage,
            "method": self.method,
            "rates": {"R0": self.rates[0], "R1": self.rates[1], "R2": self.rates[2]} if self.rates else {},
            "config": self.config,
            **self.extra,
        }


def _trial_rng(seed, t):
    return np.random.default_rng(np.random.SeedSequence([seed, 7, t]))


def run_trials(cb: Codebook, ch: DmChannel, cfg: SimConfig) -> SimReport:
    """Monte-Carlo estimate of the union error probability over ``cfg.trials`` blocks."""
    dec = _decoders(cb, ch)
    errors = 0
    for t in range(cfg.trials):
        rng = _trial_rng(cfg.seed, t)
        w0 = int(rng.integers(cb.m0))
        w1 = int(rng.integers(cb.m1))
        w2 = int(rng.integers(cb.m2))
        x1, _ = encode1(cb, w0, w1, rng)
        x2 = encode2(cb, w0, w2)
        y1, y2 = transmit(ch, x1, x2, rng)
        try:
            ok1 = decode1(cb, y1, ch, _dec=dec) == (w0, w1, w2)
            ok2 = decode2(cb, y2, ch, _dec=dec) == (w0, w2)
        except DecodeError:
            ok1 = ok2 = False
        errors += not (ok1 and ok2)
    pe = errors / cfg.trials
    ci = 1.96 * math.sqrt(pe * (1 - pe) / cfg.trials)
    return SimReport(pe_estimate=pe, pe_ci=ci, rates=cfg.rates, config=cfg.as_dict(),
                     extra={"errors": errors, "trials": cfg.trials})


def _y2_kernel(cb, ch):
    """T[v1, x2, y2] = sum_x1 p(x1|v1) p(y2|x1, x2)."""
    return np.einsum("va,aby->vby", cb.law.p_x1_given_v1.rows, ch.y2_law)


def _tuple_words(cb):
    """(v1, x2) sequences for every (w0, w1, l, w2), flattened to (tuples, n)."""
    shape = (cb.m0, cb.m1, cb.bin_size, cb.m2, cb.n)
    v1 = np.broadcast_to(cb.v1_words[:, :, :, None, :], shape)
    x2 = np.broadcast_to(cb.x2_words[:, None, None, :, :], shape)
    return v1.reshape(-1, cb.n), x2.reshape(-1, cb.n)


def _entropy_bits(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def exact_equivocation(cb: Codebook, ch: DmChannel, budget=DEFAULT_EQUIVOCATION_BUDGET) -> float:
    """H(W1 | Y2^n) / n in bits for this fixed codebook, with uniform independent messages.

    Enumerates every y2 sequence; raises BudgetError when
    ``|Y2|^n * m0 * m1 * L * m2`` exceeds ``budget``.
    """
    work = ch.y2_size ** cb.n * cb.m0 * cb.m1 * cb.bin_size * cb.m2
    if work > budget:
        raise BudgetError(f"exact equivocation needs {work} likelihood entries (budget {budget}); "
                          "use the Monte-Carlo estimate instead", count=work, cap=budget)
    kern = _y2_kernel(cb, ch)
    v1, x2 = _tuple_words(cb)
    like = kern[v1[:, 0], x2[:, 0]]
    for i in range(1, cb.n):
        like = (like[:, :, None] * kern[v1[:, i], x2[:, i]][:, None, :]).reshape(like.shape[0], -1)
    like = like.reshape(cb.m0, cb.m1, cb.bin_size, cb.m2, -1)
    # p(w1, y2) with W0, W1, W2 uniform and l uniform inside the bin
    p_w1_y2 = like.mean(axis=(0, 2, 3)) / cb.m1
    h_joint = _entropy_bits(p_w1_y2.ravel())
    h_y2 = _entropy_bits(p_w1_y2.sum(axis=0))
    return max(h_joint - h_y2, 0.0) / cb.n


def monte_carlo_equivocation(cb: Codebook, ch: DmChannel, samples, seed):
    """Sampled estimate of H(W1 | Y2^n) / n and its standard error.

    Each sample draws messages, bin index, X1 and Y2 forward, then scores
    ``-log2 p(w1 | y2)`` under the exact posterior for that y2.
    """
    kern = _y2_kernel(cb, ch)
    v1, x2 = _tuple_words(cb)
    scores = np.empty(samples)
    for s in range(samples):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 11, s]))
        w0, w1, w2 = (int(rng.integers(m)) for m in (cb.m0, cb.m1, cb.m2))
        x1, _ = encode1(cb, w0, w1, rng)
        _, y2 = transmit(ch, x1, cb.x2_words[w0, w2], rng)
        like = np.prod(kern[v1, x2, y2[None, :]], axis=1)
        post = like.reshape(cb.m0, cb.m1, cb.bin_size, cb.m2).sum(axis=(0, 2, 3))
        scores[s] = -math.log2(post[w1] / post.sum())
    est = float(scores.mean()) / cb.n
    err = float(scores.std(ddof=1)) / math.sqrt(samples) / cb.n if samples > 1 else float("inf")
    return est, err


def simulate(law: InnerAuxLaw, ch: DmChannel, cfg: SimConfig, monte_carlo=False,
             mc_samples=2000):
    """Full pipeline: codebook, error-rate trials and equivocation."""
    cfg = resolve_bin_size(cfg, law, ch)
    cb = generate_codebook(law, cfg)
    report = run_trials(cb, ch, cfg)
    r1 = cfg.rates[1]
    if monte_carlo:
        eq, err = monte_carlo_equivocation(cb, ch, mc_samples, cfg.seed)
        report.method = "monte_carlo"
        report.extra["equivocation_stderr"] = err
    else:
        eq = exact_equivocation(cb, ch, cfg.equivocation_budget)
        report.method = "exact"
    report.equivocation_per_symbol = eq
    report.leakage = r1 - eq
    report.config = cfg.as_dict()
    return report
