"""Samplers built on the three couplings of the Lah distribution.

* ``records``: uniform composition plus i.i.d. uniform labels, counting
  left-to-right maxima inside each block;
* ``bernoulli-blocks``: uniform composition, and within a block position
  ``l`` is a record with probability ``1/l`` independently;
* ``polya``: the urn with ``k`` colors, counting local records.

Randomness comes from :class:`RngHandle`, a thin wrapper over numpy's
counter-based Philox generator keyed by ``(seed, stream)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lahdist
from .bigcomb import binomial
from .errors import DomainError

__all__ = [
    "METHODS",
    "AldousFamily",
    "Composition",
    "RngHandle",
    "UrnState",
    "aldous_family",
    "b1_pair",
    "b1_tail",
    "block_counts",
    "block_counts_batch",
    "count_records",
    "empirical_pmf",
    "marginal_b1",
    "polya_urn_path",
    "sample_composition",
    "sample_compositions",
    "sample_dump_csv",
    "sample_lah",
    "sample_lah_batch",
    "sample_summary",
    "tv_distance",
]

METHODS = ("records", "bernoulli-blocks", "polya")
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngHandle:
    """Reproducible random stream.

    The Philox-4x64 key is ``seed + 2**64 * stream``.  ``generator(attempt)``
    returns a fresh generator; nonzero ``attempt`` moves the counter to a
    disjoint block so retries never reuse numbers of the first attempt.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not 0 <= v <= _MASK64:
                raise DomainError(f"{name} must fit in 64 bits, got {v}")

    def generator(self, attempt: int = 0) -> np.random.Generator:
        key = self.seed | (self.stream << 64)
        bitgen = np.random.Philox(key=key, counter=[0, 0, 0, attempt])
        return np.random.Generator(bitgen)

    def child(self, stream: int) -> "RngHandle":
        return RngHandle(self.seed, stream)


def _gen(rng) -> np.random.Generator:
    if isinstance(rng, RngHandle):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngHandle or numpy Generator, got {type(rng).__name__}")


def _check_nk(n: int, k: int):
    if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
        raise DomainError("n and k must be integers")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")


@dataclass(frozen=True)
class Composition:
    """Ordered positive parts ``(b_1, ..., b_k)``."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(int(b) for b in self.parts)
        if not parts or min(parts) < 1:
            raise DomainError(f"composition parts must be positive, got {self.parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    @property
    def k(self) -> int:
        return len(self.parts)

    def starts(self) -> list[int]:
        """0-based index of the first position of each block."""
        out, pos = [], 0
        for b in self.parts:
            out.append(pos)
            pos += b
        return out


def sample_composition(n: int, k: int, rng) -> Composition:
    """Uniform composition of ``n`` into ``k`` parts (uniform ``k-1`` subset of gaps)."""
    _check_nk(n, k)
    g = _gen(rng)
    cuts = np.sort(g.choice(n - 1, size=k - 1, replace=False)) + 1 if k > 1 else np.array([], int)
    edges = np.concatenate(([0], cuts, [n]))
    return Composition(tuple(np.diff(edges)))


_CHUNK_CELLS = 1 << 22


def _cut_matrix(n: int, k: int, size: int, g: np.random.Generator) -> np.ndarray:
    """Boolean ``(size, n)`` matrix, True where a block starts."""
    starts = np.zeros((size, n), dtype=bool)
    starts[:, 0] = True
    if k > 1:
        keys = g.random((size, n - 1))
        cuts = np.argpartition(keys, k - 2, axis=1)[:, : k - 1] + 1
        np.put_along_axis(starts, cuts, True, axis=1)
    return starts


def sample_compositions(n: int, k: int, size: int, rng) -> np.ndarray:
    """``(size, k)`` array of parts of independent uniform compositions."""
    _check_nk(n, k)
    g = _gen(rng)
    out = np.empty((size, k), dtype=np.int64)
    # chunked to bound memory; the key stream is consumed in the same order
    step = max(1, _CHUNK_CELLS // n)
    for lo in range(0, size, step):
        m = min(step, size - lo)
        pos = np.nonzero(_cut_matrix(n, k, m, g))[1].reshape(m, k)
        out[lo : lo + m] = np.diff(np.concatenate((pos, np.full((m, 1), n)), axis=1), axis=1)
    return out


def count_records(labels, comp: Composition) -> int:
    """Total number of left-to-right maxima inside the blocks of ``comp``."""
    labels = list(labels)
    if len(labels) != comp.n:
        raise DomainError(f"need {comp.n} labels, got {len(labels)}")
    if len(set(labels)) != len(labels):
        raise DomainError("labels must be pairwise distinct")
    total, pos = 0, 0
    for b in comp.parts:
        best = -math.inf
        for u in labels[pos : pos + b]:
            if u > best:
                best = u
                total += 1
        pos += b
    return total


def _distinct_labels(g: np.random.Generator, shape) -> np.ndarray:
    # exact ties among doubles have probability ~0; redraw if they occur
    while True:
        u = g.random(shape)
        s = np.sort(u, axis=-1)
        if not np.any(s[..., 1:] == s[..., :-1]):
            return u


def _records_from_starts(starts: np.ndarray, u: np.ndarray) -> np.ndarray:
    size, n = starts.shape
    run = np.full(size, -1.0)
    total = np.zeros(size, dtype=np.int64)
    for i in range(n):
        run = np.where(starts[:, i], -1.0, run)
        rec = u[:, i] > run
        total += rec
        run = np.maximum(run, u[:, i])
    return total


def _block_index(starts: np.ndarray) -> np.ndarray:
    """1-based position of each element within its block."""
    n = starts.shape[1]
    idx = np.arange(n)
    last_start = np.maximum.accumulate(np.where(starts, idx, 0), axis=1)
    return idx - last_start + 1


def _polya_batch(n: int, k: int, size: int, g: np.random.Generator) -> np.ndarray:
    balls = np.zeros((size, n), dtype=np.int64)
    balls[:, :k] = np.arange(k)
    best = g.random((size, k))
    rows = np.arange(size)
    y = np.full(size, k, dtype=np.int64)
    for m in range(k, n):
        pick = (g.random(size) * m).astype(np.int64)
        color = balls[rows, pick]
        balls[:, m] = color
        lab = g.random(size)
        rec = lab > best[rows, color]
        best[rows, color] = np.where(rec, lab, best[rows, color])
        y += rec
    return y


def sample_lah_batch(n: int, k: int, method: str, size: int, rng) -> np.ndarray:
    """``size`` independent draws from ``Lah(n, k)`` with the given coupling."""
    _check_nk(n, k)
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; choose from {METHODS}")
    g = _gen(rng)
    step = max(1, _CHUNK_CELLS // n)
    return np.concatenate(
        [_lah_chunk(n, k, method, min(step, size - lo), g) for lo in range(0, size, step)]
    ) if size else np.zeros(0, dtype=np.int64)


def _lah_chunk(n, k, method, size, g):
    if method == "polya":
        return _polya_batch(n, k, size, g)
    starts = _cut_matrix(n, k, size, g)
    if method == "records":
        return _records_from_starts(starts, _distinct_labels(g, (size, n)))
    ell = _block_index(starts)
    return (g.random((size, n)) * ell < 1.0).sum(axis=1)


def sample_lah(n: int, k: int, method: str, rng) -> int:
    """One draw from ``Lah(n, k)``."""
    return int(sample_lah_batch(n, k, method, 1, rng)[0])


@dataclass
class UrnState:
    """Polya urn with ``k`` colors and local-record bookkeeping."""

    k: int
    counts: list = field(default_factory=list)
    best: list = field(default_factory=list)
    balls: list = field(default_factory=list)
    records: int = 0

    @classmethod
    def start(cls, k: int, labels) -> "UrnState":
        labels = list(labels)
        return cls(k, [1] * k, labels, list(range(k)), k)

    @property
    def total(self) -> int:
        return len(self.balls)

    def step(self, u_pick: float, label: float) -> None:
        color = self.balls[int(u_pick * len(self.balls))]
        self.balls.append(color)
        self.counts[color] += 1
        if label > self.best[color]:
            self.best[color] = label
            self.records += 1


def polya_urn_path(n_max: int, k: int, rng) -> list[int]:
    """Record counts ``Y_k, ..., Y_{n_max}`` along one urn run."""
    _check_nk(n_max, k)
    g = _gen(rng)
    urn = UrnState.start(k, g.random(k))
    picks = g.random(n_max - k).tolist()
    labels = g.random(n_max - k).tolist()
    path = [urn.records]
    for u, v in zip(picks, labels):
        urn.step(u, v)
        path.append(urn.records)
    return path


@dataclass(frozen=True)
class AldousFamily:
    """Consistent family of compositions from random edge removals.

    The path on ``n`` vertices has edges ``1..n-1`` (edge ``e`` joins
    vertices ``e-1`` and ``e`` in 0-based numbering).  ``order[t]`` is the
    edge removed at time ``t+1``; row ``k`` keeps the first ``k-1``
    removals.
    """

    n: int
    labels: np.ndarray
    order: np.ndarray

    def row(self, k: int) -> Composition:
        if not 1 <= k <= self.n:
            raise DomainError(f"row index must lie in 1..{self.n}")
        mask = np.zeros(self.n + 1, dtype=bool)
        mask[0] = mask[self.n] = True
        mask[self.order[: k - 1]] = True
        return Composition(tuple(np.diff(np.flatnonzero(mask))))

    def records(self, k: int) -> int:
        return count_records(self.labels.tolist(), self.row(k))

    def record_profile(self) -> np.ndarray:
        """``(X_{n,1}, ..., X_{n,n})`` for this realization.

        Position ``i`` is a record once some cut lies strictly after its
        nearest earlier larger label and at or before ``i``.
        """
        n = self.n
        when = np.empty(n + 1, dtype=np.int64)
        when[self.order] = np.arange(1, n)
        u = self.labels
        become = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            prev = np.flatnonzero(u[:i] > u[i])
            if prev.size:
                m = prev[-1]
                become[i] = when[m + 1 : i + 1].min()
        counts = np.bincount(become, minlength=n)
        return np.cumsum(counts)[: n]


def aldous_family(n: int, rng) -> AldousFamily:
    """Sample labels and a uniform edge-removal order."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    g = _gen(rng)
    labels = _distinct_labels(g, n)
    order = g.permutation(np.arange(1, n))
    return AldousFamily(n, labels, order)


def block_counts(comp: Composition, j_max: int) -> list[int]:
    """``N_1, ..., N_{j_max}``: number of parts equal to each size."""
    out = [0] * j_max
    for b in comp.parts:
        if b <= j_max:
            out[b - 1] += 1
    return out


def block_counts_batch(parts: np.ndarray, j_max: int) -> np.ndarray:
    """Vectorized :func:`block_counts` for a ``(size, k)`` parts array."""
    size = parts.shape[0]
    clipped = np.where(parts <= j_max, parts, 0)
    flat = clipped + (j_max + 1) * np.arange(size)[:, None]
    counts = np.bincount(flat.ravel(), minlength=size * (j_max + 1)).reshape(size, j_max + 1)
    return counts[:, 1:]


def marginal_b1(n: int, k: int, j: int) -> Fraction:
    """``P[b_1 = j] = binom(n-j-1, k-2) / binom(n-1, k-1)``."""
    _check_nk(n, k)
    if not 1 <= j <= n - k + 1:
        return Fraction(0)
    if k == 1:
        return Fraction(int(j == n))
    return Fraction(binomial(n - j - 1, k - 2), binomial(n - 1, k - 1))


def b1_tail(n: int, k: int, j: int) -> Fraction:
    """``P[b_1 >= j] = binom(n-j, k-1) / binom(n-1, k-1)`` (hockey stick)."""
    _check_nk(n, k)
    if j <= 1:
        return Fraction(1)
    if j > n - k + 1:
        return Fraction(0)
    return Fraction(binomial(n - j, k - 1), binomial(n - 1, k - 1))


def b1_pair(n: int, k: int, i: int, j: int) -> Fraction:
    """``P[b_1 = i, b_2 = j]`` for ``k >= 2``."""
    _check_nk(n, k)
    if k < 2 or i < 1 or j < 1 or i + j > n - k + 2:
        return Fraction(0)
    if k == 2:
        return Fraction(int(i + j == n), n - 1)
    return Fraction(binomial(n - i - j - 1, k - 3), binomial(n - 1, k - 1))


def empirical_pmf(values, n: int) -> np.ndarray:
    """Relative frequencies of ``0..n``."""
    v = np.asarray(values, dtype=np.int64)
    return np.bincount(v, minlength=n + 1)[: n + 1] / v.size


def tv_distance(values, n: int, k: int) -> float:
    """Total variation distance between samples and the exact ``Lah(n, k)``."""
    emp = empirical_pmf(values, n)
    exact = np.zeros(n + 1)
    for j, m in lahdist.pmf_table(n, k).items():
        exact[j] = float(m)
    return 0.5 * float(np.abs(emp - exact).sum())


def sample_summary(values, n: int, k: int) -> dict:
    """Summary record: count, mean, variance and TV distance to the exact law."""
    v = np.asarray(values, dtype=float)
    return {
        "count": int(v.size),
        "mean": float(v.mean()),
        "variance": float(v.var(ddof=1)) if v.size > 1 else 0.0,
        "tv_distance_vs_exact": tv_distance(values, n, k),
    }


def sample_dump_csv(values) -> str:
    """CSV with columns ``trial, value``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "value"])
    for i, x in enumerate(values):
        w.writerow([i, int(x)])
    return buf.getvalue()


def sample_summary_json(values, n: int, k: int) -> str:
    return json.dumps(sample_summary(values, n, k), indent=2)
