"""
Evolving Erdos-Renyi graph with incremental component-size moments.

:class:`ComponentTracker` is a union-find over ``n`` vertices that keeps
``S_k = sum_i |C_i|^k`` for ``k = 1..kmax`` up to date on every merge, using

    Delta S_k = (a + b)^k - a^k - b^k

when components of sizes ``a`` and ``b`` join.  Values are exact Python
integers held to the unsigned 128-bit range; leaving that range is an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "ComponentTracker",
    "MergeOutcome",
    "SnapshotSummary",
    "MomentOverflowError",
    "MAX_KMAX",
    "WIDE_LIMIT",
    "derive_seed",
    "make_rng",
    "pair_count",
    "density_from_nt",
    "density_from_p",
    "sample_distinct_pairs",
    "sample_gnp",
    "trajectory",
    "component_sizes",
    "moments_from_sizes",
]

MAX_KMAX = 16
WIDE_LIMIT = 1 << 128


class MomentOverflowError(OverflowError):
    """A tracked moment left the unsigned 128-bit range."""

    def __init__(self, k: int, what: str = "S"):
        self.k = k
        super().__init__(
            f"{what}_{k} exceeds the unsigned 128-bit range; rerun with a lower kmax"
        )


@dataclass(frozen=True)
class MergeOutcome:
    merged: bool
    sizes_before: tuple[int, int] | None = None
    deltas: tuple[int, ...] | None = None


@dataclass
class SnapshotSummary:
    """One observation of the graph: moments, susceptibility, largest components."""

    n: int
    m: int
    p: float
    t: float
    kmax: int
    S: tuple[int, ...]
    largest1: int
    largest2: int
    seed: int | None = None
    replicate: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def nt(self) -> float:
        return self.n * self.t

    @property
    def chi(self) -> float:
        return self.S[1] / self.n

    def s(self, k: int) -> int:
        return self.S[k - 1]

    def csv_row(self) -> list[str]:
        return (
            [str(self.n), str(self.m), repr(self.p), repr(self.t), repr(self.nt),
             str(self.kmax)]
            + [str(v) for v in self.S]
            + [repr(self.chi), str(self.largest1), str(self.largest2),
               "" if self.seed is None else str(self.seed),
               "" if self.replicate is None else str(self.replicate)]
        )

    @staticmethod
    def csv_header(kmax: int) -> list[str]:
        return (
            ["n", "m", "p", "t", "nt", "kmax"]
            + [f"S_{k}" for k in range(1, kmax + 1)]
            + ["chi", "largest1", "largest2", "seed", "replicate"]
        )

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "p": self.p,
            "t": self.t,
            "nt": self.nt,
            "kmax": self.kmax,
            "S": [str(v) for v in self.S],
            "chi": self.chi,
            "largest1": self.largest1,
            "largest2": self.largest2,
            "seed": self.seed,
            "replicate": self.replicate,
        }


class ComponentTracker:
    """Union-find with incrementally maintained moments ``S_1..S_kmax``.

    Parameters
    ----------
    n : int
        Number of vertices, labelled ``0..n-1``.
    kmax : int
        Highest tracked moment, ``2 <= kmax <= 16``.
    """

    def __init__(self, n: int, kmax: int = 4):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if not 2 <= kmax <= MAX_KMAX:
            raise ValueError(
                f"kmax must lie in [2, {MAX_KMAX}], got {kmax} "
                "(higher moments overflow 128 bits)"
            )
        self.n = n
        self.kmax = kmax
        self.parent = list(range(n))
        self.comp_size = [1] * n
        self.S = [n] * kmax
        self.merges = 0
        # when n^kmax fits, no moment can ever overflow
        self._checked = n**kmax >= WIDE_LIMIT
        self._largest: tuple[int, int] | None = (1, 1 if n > 1 else 0)

    def copy(self) -> "ComponentTracker":
        other = ComponentTracker.__new__(ComponentTracker)
        other.n = self.n
        other.kmax = self.kmax
        other.parent = self.parent.copy()
        other.comp_size = self.comp_size.copy()
        other.S = self.S.copy()
        other.merges = self.merges
        other._checked = self._checked
        other._largest = self._largest
        return other

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def s(self, k: int) -> int:
        if not 1 <= k <= self.kmax:
            raise ValueError(f"S_{k} is not tracked (kmax={self.kmax})")
        return self.S[k - 1]

    @property
    def chi(self) -> float:
        return self.S[1] / self.n

    @property
    def components(self) -> int:
        return self.n - self.merges

    def _check(self, k: int, value: int, what: str = "S") -> int:
        if value >= WIDE_LIMIT:
            raise MomentOverflowError(k, what)
        return value

    def add_edge(self, u: int, v: int) -> MergeOutcome:
        """Insert edge ``{u, v}``; returns what changed."""
        if u == v:
            raise ValueError("self-loops are not part of the model")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"vertex out of range for n={self.n}: ({u}, {v})")
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return MergeOutcome(False)
        a, b = self.comp_size[ru], self.comp_size[rv]
        if a < b:
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.comp_size[ru] = a + b
        self.merges += 1
        deltas = [0]
        pa, pb, ps = a, b, a + b
        for i in range(1, self.kmax):
            pa *= a
            pb *= b
            ps *= a + b
            d = ps - pa - pb
            deltas.append(d)
            self.S[i] += d
            if self._checked:
                self._check(i + 1, self.S[i])
        self._largest = None
        return MergeOutcome(True, (a, b), tuple(deltas))

    def add_edges(self, us: Iterable[int], vs: Iterable[int]) -> int:
        """Bulk insertion without per-edge outcome objects; returns merges done.

        Endpoints are assumed distinct and in range (the samplers guarantee it).
        """
        parent = self.parent
        size = self.comp_size
        S = self.S
        kmax = self.kmax
        checked = self._checked
        merged = 0
        for u, v in zip(us, vs):
            while parent[u] != u:
                parent[u] = parent[parent[u]]
                u = parent[u]
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            if u == v:
                continue
            a = size[u]
            b = size[v]
            if a < b:
                u, v = v, u
            parent[v] = u
            c = a + b
            size[u] = c
            merged += 1
            pa, pb, pc = a * a, b * b, c * c
            S[1] += pc - pa - pb
            for i in range(2, kmax):
                pa *= a
                pb *= b
                pc *= c
                S[i] += pc - pa - pb
            if checked:
                for i in range(1, kmax):
                    if S[i] >= WIDE_LIMIT:
                        raise MomentOverflowError(i + 1)
        if merged:
            self.merges += merged
            self._largest = None
        return merged

    def _refresh_largest(self) -> tuple[int, int]:
        if self._largest is None:
            l1 = l2 = 0
            parent, size = self.parent, self.comp_size
            for x in range(self.n):
                if parent[x] == x:
                    s = size[x]
                    if s > l1:
                        l1, l2 = s, l1
                    elif s > l2:
                        l2 = s
            self._largest = (l1, l2)
        return self._largest

    @property
    def largest1(self) -> int:
        return self._refresh_largest()[0]

    @property
    def largest2(self) -> int:
        return self._refresh_largest()[1]

    def root_sizes(self) -> list[int]:
        return [self.comp_size[x] for x in range(self.n) if self.parent[x] == x]

    def recompute(self) -> list[int]:
        """Moments recomputed from scratch by enumerating components."""
        return moments_from_sizes(self.root_sizes(), self.kmax)

    def s_kl(self, k: int, l: int) -> int:
        """Sum over ordered pairs of distinct components of |C_i|^k |C_j|^l."""
        if k < 1 or l < 1:
            raise ValueError("k and l must be >= 1")
        if k + l > self.kmax:
            raise ValueError(f"S_{k},{l} needs kmax >= {k + l}, have {self.kmax}")
        return self._check(k + l, self.s(k) * self.s(l) - self.s(k + l), what=f"S_{k},")

    def drift_v(self, k: int) -> int:
        """Expected rate of change of ``S_k`` per unit time of the edge-arrival process.

        Every absent edge arrives at rate 1, so the drift is
        ``sum_{l=1}^{k-1} C(k, l) S_{l+1, k+1-l} / 2``.
        """
        if k < 2:
            raise ValueError("drift is defined for k >= 2")
        if self.kmax < k + 2:
            raise ValueError(f"drift of S_{k} needs kmax >= {k + 2}, have {self.kmax}")
        total = sum(comb(k, l) * self.s_kl(l + 1, k + 1 - l) for l in range(1, k))
        half, rem = divmod(total, 2)
        assert rem == 0, "drift numerator must be even"
        return half

    def snapshot(self, m: int | None = None, p: float | None = None,
                 t: float | None = None, seed=None, replicate=None) -> SnapshotSummary:
        N = pair_count(self.n)
        if m is None:
            m = self.merges
        if p is None:
            p = m / N if N else 0.0
        if t is None:
            t = -math.log1p(-p) if p < 1 else math.inf
        l1, l2 = self._refresh_largest()
        return SnapshotSummary(
            n=self.n, m=m, p=p, t=t, kmax=self.kmax, S=tuple(self.S),
            largest1=l1, largest2=l2, seed=seed, replicate=replicate,
        )


def moments_from_sizes(sizes: Iterable[int], kmax: int) -> list[int]:
    out = [0] * kmax
    for s in sizes:
        s = int(s)
        pw = 1
        for i in range(kmax):
            pw *= s
            out[i] += pw
    return out


def component_sizes(n: int, edges: Iterable[tuple[int, int]]) -> list[int]:
    """Component sizes by breadth-first search; an independent check on the tracker."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    sizes = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack = [s]
        count = 0
        while stack:
            x = stack.pop()
            count += 1
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        sizes.append(count)
    return sizes


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


def derive_seed(master_seed: int, *path: int) -> int:
    """64-bit seed hashed from ``master_seed`` and a replicate index path."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(i) for i in path))
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def density_from_nt(n: int, nt: float) -> tuple[float, float]:
    """(p, t) for process time ``t = nt / n``; ``p = 1 - exp(-t)``."""
    t = nt / n
    return -math.expm1(-t), t


def density_from_p(p: float) -> float:
    return -math.log1p(-p) if p < 1 else math.inf


def _decode_pair_index(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # index i <-> (u, v) with u < v, i = v(v-1)/2 + u
    v = ((1 + np.sqrt(1 + 8 * idx.astype(np.float64))) // 2).astype(np.int64)
    tri = v * (v - 1) // 2
    v = np.where(tri > idx, v - 1, v)
    tri = v * (v - 1) // 2
    v = np.where(idx - tri >= v, v + 1, v)
    tri = v * (v - 1) // 2
    return idx - tri, v


def sample_distinct_pairs(rng: np.random.Generator, n: int, m: int
                          ) -> tuple[np.ndarray, np.ndarray]:
    """``m`` distinct unordered vertex pairs, uniformly chosen, in uniform random order.

    Sparse requests use rejection: i.i.d. uniform pairs are drawn and the
    first occurrence of each is kept.  Dense requests (more than a quarter of
    all pairs) sample pair indices without replacement instead.
    """
    N = pair_count(n)
    if m < 0 or m > N:
        raise ValueError(f"cannot pick {m} distinct pairs out of {N}")
    if m == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    if 4 * m > N:
        idx = rng.choice(N, size=m, replace=False).astype(np.int64)
        return _decode_pair_index(idx)
    keys = np.empty(0, dtype=np.int64)
    while keys.size < m:
        need = m - keys.size
        batch = need + need // 8 + 16
        u = rng.integers(0, n, size=batch, dtype=np.int64)
        v = rng.integers(0, n, size=batch, dtype=np.int64)
        ok = u != v
        u, v = u[ok], v[ok]
        new = np.minimum(u, v) * n + np.maximum(u, v)
        merged = np.concatenate([keys, new])
        _, first = np.unique(merged, return_index=True)
        first.sort()
        keys = merged[first]
    keys = keys[:m]
    return keys // n, keys % n


def sample_gnp(n: int, p: float, kmax: int = 4, seed: int = 0,
               replicate: int | None = None, t: float | None = None
               ) -> SnapshotSummary:
    """One draw of G(n, p) summarised by its component moments.

    The edge count is Binomial(n(n-1)/2, p) (numpy's exact sampler), then that
    many distinct uniform pairs are inserted through the tracker.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    rng = make_rng(seed)
    N = pair_count(n)
    m = int(rng.binomial(N, p)) if N else 0
    tracker = ComponentTracker(n, kmax)
    us, vs = sample_distinct_pairs(rng, n, m)
    tracker.add_edges(us.tolist(), vs.tolist())
    if t is None:
        t = density_from_p(p)
    return tracker.snapshot(m=m, p=p, t=t, seed=seed, replicate=replicate)


def trajectory(n: int, kmax: int, checkpoints: Sequence[int], seed: int = 0
               ) -> list[SnapshotSummary]:
    """Random graph process driven by edge count, observed at ``checkpoints``.

    Each snapshot reports ``m``, ``p = m / N`` and ``t = -log(1 - p)``.
    """
    cps = [int(c) for c in checkpoints]
    if not cps:
        return []
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing (no duplicates)")
    N = pair_count(n)
    if cps[0] < 0 or cps[-1] > N:
        raise ValueError(f"checkpoints must lie in [0, {N}]")
    rng = make_rng(seed)
    us, vs = sample_distinct_pairs(rng, n, cps[-1])
    us, vs = us.tolist(), vs.tolist()
    tracker = ComponentTracker(n, kmax)
    out = []
    done = 0
    for c in cps:
        tracker.add_edges(us[done:c], vs[done:c])
        done = c
        p = c / N if N else 0.0
        out.append(tracker.snapshot(m=c, p=p, seed=seed))
    return out
