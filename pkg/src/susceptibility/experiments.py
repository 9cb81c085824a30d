"""
Monte Carlo harness: seeded replicates, theory predictions and statistical verdicts.

Every replicate draws its own 64-bit seed from ``(master_seed, index)``, so
results depend only on the configuration, never on scheduling.  The density
is carried as ``nt`` (process time times ``n``); ``p = 1 - exp(-t)``.
"""

from __future__ import annotations

import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .graph import (
    ComponentTracker,
    SnapshotSummary,
    density_from_nt,
    density_from_p,
    derive_seed,
    make_rng,
    pair_count,
    sample_distinct_pairs,
    sample_gnp,
)
from .poly import compute_hp, compute_p
from .stats import (
    JB_CRITICAL_999,
    CovarianceAccumulator,
    MomentAccumulator,
    SummaryStats,
)

log = logging.getLogger(__name__)

__all__ = [
    "ExperimentConfig",
    "TheoryComparison",
    "DegenerateSampleError",
    "run_replicates",
    "iter_replicates",
    "theory_mean_s_k",
    "theory_cov_s_kl",
    "normality_suite",
    "solve_rho",
    "lln_suite",
    "covariance_suite",
    "supercritical_check",
    "critical_scaling",
    "inverse_chi_scan",
    "drift_check",
    "run_suite",
    "SUITES",
]

class DegenerateSampleError(ValueError):
    """Sample has zero variance; standardisation is impossible."""


@dataclass
class ExperimentConfig:
    n: int = 100_000
    nt: float | None = 0.5
    p: float | None = None
    t: float | None = None
    m: int | None = None
    kmax: int = 4
    replicates: int = 200
    master_seed: int = 0
    kind: str = "lln"
    threads: int = 1
    output: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        if self.replicates < 2:
            raise ValueError("need at least 2 replicates")
        given = [x for x in (self.p, self.t, self.m) if x is not None]
        if given and self.nt is not None:
            # an explicit p, t or m overrides the default nt
            self.nt = None
        if len(given) > 1:
            raise ValueError("give exactly one of nt, p, t, m")

    def density(self) -> tuple[float, float]:
        """Resolved ``(p, t)``."""
        if self.m is not None:
            N = pair_count(self.n)
            if not 0 <= self.m <= N:
                raise ValueError(f"m must lie in [0, {N}]")
            p = self.m / N if N else 0.0
            return p, density_from_p(p)
        if self.p is not None:
            if not 0.0 <= self.p <= 1.0:
                raise ValueError("p must lie in [0, 1]")
            return self.p, density_from_p(self.p)
        if self.t is not None:
            return -math.expm1(-self.t), self.t
        if self.nt is None:
            raise ValueError("no density given")
        return density_from_nt(self.n, self.nt)

    @property
    def nt_value(self) -> float:
        return self.n * self.density()[1]

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("output", None)
        d.pop("threads", None)
        d.pop("fmt", None)
        return d


@dataclass
class TheoryComparison:
    name: str
    empirical: float
    theory: float
    se: float | None
    source: str
    criterion: str
    verdict: bool
    extra: dict = field(default_factory=dict)

    @property
    def z(self) -> float | None:
        if self.se is None or not self.se > 0:
            return None
        return (self.empirical - self.theory) / self.se

    def as_dict(self) -> dict:
        d = {
            "name": self.name,
            "empirical": self.empirical,
            "theory": self.theory,
            "se": self.se,
            "z": self.z,
            "verdict": "pass" if self.verdict else "fail",
            "source": self.source,
            "criterion": self.criterion,
        }
        if self.extra:
            d["extra"] = self.extra
        return d


# ---------------------------------------------------------------------------
# replicates
# ---------------------------------------------------------------------------


def _replicate_job(args) -> SnapshotSummary:
    n, p, t, m, kmax, seed, index = args
    if m is None:
        return sample_gnp(n, p, kmax, seed=seed, replicate=index, t=t)
    rng = make_rng(seed)
    tracker = ComponentTracker(n, kmax)
    us, vs = sample_distinct_pairs(rng, n, m)
    tracker.add_edges(us.tolist(), vs.tolist())
    return tracker.snapshot(m=m, p=p, t=t, seed=seed, replicate=index)


def _jobs(config: ExperimentConfig, key: Sequence[int] = ()):
    p, t = config.density()
    for i in range(config.replicates):
        seed = derive_seed(config.master_seed, *key, i)
        yield (config.n, p, t, config.m, config.kmax, seed, i)


def iter_replicates(config: ExperimentConfig, key: Sequence[int] = ()
                    ) -> Iterator[SnapshotSummary]:
    """Replicates in index order; a process pool is used when ``threads > 1``."""
    jobs = _jobs(config, key)
    if config.threads <= 1:
        for job in jobs:
            yield _replicate_job(job)
        return
    with ProcessPoolExecutor(max_workers=config.threads) as pool:
        yield from pool.map(_replicate_job, jobs, chunksize=4)


def run_replicates(config: ExperimentConfig, key: Sequence[int] = ()) -> list[SnapshotSummary]:
    return list(iter_replicates(config, key))


# ---------------------------------------------------------------------------
# theory
# ---------------------------------------------------------------------------


def _x_of(n: int, t: float) -> float:
    nt = n * t
    if not 0.0 <= nt < 1.0:
        raise ValueError(f"theory needs 0 <= nt < 1, got nt={nt}")
    return 1.0 / (1.0 - nt)


def theory_mean_s_k(n: int, t: float, k: int) -> float:
    """Leading-order E S_k(t) = n p_k(1/(1-nt))."""
    return n * compute_p(k)(_x_of(n, t))


def theory_cov_s_kl(n: int, t: float, k: int, l: int) -> float:
    """Leading-order Cov(S_k(t), S_l(t)) = n hp_{k,l}(1/(1-nt))."""
    return n * compute_hp(k, l)(_x_of(n, t))


def normality_suite(samples, mean: float | None = None, var: float | None = None,
                    critical: float = JB_CRITICAL_999) -> tuple[SummaryStats, bool]:
    """Jarque-Bera check of a sample, standardised by theoretical mean and variance.

    Returns the summary of the standardised sample and whether JB < critical.
    """
    xs = np.asarray(samples, dtype=float)
    if xs.size < 100:
        raise ValueError(f"normality check needs >= 100 samples, got {xs.size}")
    if np.all(xs == xs[0]):
        raise DegenerateSampleError("zero variance sample")
    mu = xs.mean() if mean is None else mean
    sd = xs.std(ddof=1) if var is None else math.sqrt(var)
    acc = MomentAccumulator().extend((xs - mu) / sd)
    stats = SummaryStats.from_accumulator("standardized", acc)
    return stats, stats.jb < critical


def solve_rho(lam: float, tol: float = 1e-12) -> float:
    """Survival probability of a Poisson(lam) Galton-Watson tree, rho = 1 - exp(-lam rho).

    Plain bisection on ``f(r) = 1 - exp(-lam r) - r``, positive near 0 and
    negative at 1 whenever ``lam > 1``.
    """
    if not lam > 1.0 + 1e-9:
        raise ValueError(f"solve_rho needs lambda > 1, got {lam}")

    def f(r):
        return -math.expm1(-lam * r) - r

    lo = min(0.5, (lam - 1.0) / (lam * lam))
    hi = 1.0
    while f(lo) <= 0.0:
        lo /= 2.0
    while hi - lo > tol * 0.01:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _accumulate(config: ExperimentConfig, rows: list | None = None):
    """Stream replicates into per-statistic accumulators."""
    dim = config.kmax - 1
    chi = MomentAccumulator()
    scaled = [MomentAccumulator() for _ in range(dim)]
    cov = CovarianceAccumulator(dim)
    chis = []
    for snap in iter_replicates(config):
        if rows is not None:
            rows.append(snap)
        chi.push(snap.chi)
        chis.append(snap.chi)
        vec = [snap.S[k - 1] / config.n for k in range(2, config.kmax + 1)]
        for acc, v in zip(scaled, vec):
            acc.push(v)
        cov.push(vec)
    return chi, scaled, cov, chis


def lln_suite(config: ExperimentConfig, rows: list | None = None) -> list[TheoryComparison]:
    """Means of chi and S_k/n against their polynomial limits."""
    p, t = config.density()
    x = _x_of(config.n, t)
    chi, scaled, _, _ = _accumulate(config, rows)
    out = []
    se = math.sqrt(chi.variance / chi.n)
    rel = abs(chi.mean / x - 1.0)
    out.append(TheoryComparison(
        "mean_chi", chi.mean, x, se, "chi -> 1/(1-nt)",
        "|mean/theory - 1| < 0.01", rel < 0.01, {"relative_error": rel},
    ))
    for k, acc in zip(range(2, config.kmax + 1), scaled):
        theory = float(compute_p(k)(x))
        se = math.sqrt(acc.variance / acc.n)
        cmp_ = TheoryComparison(
            f"mean_S{k}_over_n", acc.mean, theory, se, f"E S_{k} = n p_{k}(1/(1-nt))",
            "|z| < 3", False,
        )
        cmp_.verdict = cmp_.z is not None and abs(cmp_.z) < 3.0
        out.append(cmp_)
    return out


def covariance_suite(config: ExperimentConfig, rows: list | None = None,
                     normality: bool = True) -> list[TheoryComparison]:
    """Variances and covariances of S_k/sqrt(n) against n hp_{k,l}; optional JB on chi."""
    if config.kmax < 3:
        raise ValueError("covariance suite needs kmax >= 3")
    p, t = config.density()
    n = config.n
    x = _x_of(n, t)
    chi, scaled, cov, chis = _accumulate(config, rows)
    C = cov.covariance * n  # covariance of S_k / n, rescaled to Cov(S_k, S_l) / n
    out = []
    var_chi_theory = 2.0 * p / (1.0 - n * p) ** 5
    ratio = chi.variance / var_chi_theory
    se = SummaryStats.from_accumulator("chi", chi).se_variance
    out.append(TheoryComparison(
        "var_chi", chi.variance, var_chi_theory, se,
        "Var chi ~ 2p/(1-np)^5", "ratio in [0.7, 1.3]", 0.7 <= ratio <= 1.3,
        {"ratio": ratio},
    ))
    pairs = [(2, 2), (3, 3), (3, 2)]
    for k, l in pairs:
        emp = float(C[k - 2, l - 2])
        theory = float(compute_hp(k, l)(x))
        ratio = emp / theory
        out.append(TheoryComparison(
            f"cov_S{k}_S{l}_over_n" if k != l else f"var_S{k}_over_n",
            emp, theory, None, f"Cov(S_{k}, S_{l}) = n hp_{k},{l}(1/(1-nt))",
            "ratio in [0.7, 1.3]", 0.7 <= ratio <= 1.3, {"ratio": ratio},
        ))
    if normality:
        stats, ok = normality_suite(chis, mean=x, var=var_chi_theory)
        out.append(TheoryComparison(
            "jarque_bera_chi", stats.jb, 0.0, None,
            "chi asymptotically normal",
            f"JB < {JB_CRITICAL_999:.2f} (chi-square(2) 0.999 quantile)", ok,
            {"skewness": stats.skewness, "excess_kurtosis": stats.excess_kurtosis,
             "standardized_mean": stats.mean, "standardized_variance": stats.variance},
        ))
    return out


def supercritical_check(n: int, lam: float, replicates: int, seed: int,
                        kmax: int = 2, threads: int = 1) -> list[TheoryComparison]:
    """Giant component size against n rho(lam) and its dominance of S_k."""
    if lam <= 1.0:
        raise ValueError("supercritical check needs lambda > 1")
    if n * (lam - 1.0) ** 3 < 1e3:
        log.warning("n (lambda-1)^3 = %.3g is small; the giant may not dominate yet",
                    n * (lam - 1.0) ** 3)
    rho = solve_rho(lam)
    cfg = ExperimentConfig(n=n, nt=None, p=lam / n, kmax=kmax, replicates=replicates,
                           master_seed=seed, kind="supercritical", threads=threads)
    frac, dom = [], {k: [] for k in range(2, kmax + 1)}
    for snap in iter_replicates(cfg):
        c1 = snap.largest1
        frac.append(c1 / (n * rho))
        for k in dom:
            dom[k].append(snap.S[k - 1] / c1**k)
    residual = abs(-math.expm1(-lam * rho) - rho)
    out = [
        TheoryComparison(
            "rho_residual", residual, 0.0, None, "rho = 1 - exp(-lam rho)",
            "residual < 1e-12", residual < 1e-12, {"rho": rho},
        ),
        TheoryComparison(
            "median_C1_over_n_rho", statistics.median(frac), 1.0, None,
            "|C_1| ~ n rho(np)", "median in [0.97, 1.03]",
            0.97 <= statistics.median(frac) <= 1.03,
            {"min": min(frac), "max": max(frac)},
        ),
    ]
    for k, vals in dom.items():
        med = statistics.median(vals)
        ok = 1.0 <= med <= 1.05 and min(vals) >= 1.0
        out.append(TheoryComparison(
            f"median_S{k}_over_C1^{k}", med, 1.0, None, f"S_{k} = |C_1|^{k} (1 + o_p(1))",
            "median in [1.00, 1.05] and every replicate >= 1", ok,
            {"min": min(vals), "max": max(vals)},
        ))
    return out


def critical_scaling(n_list: Sequence[int], replicates: int, seed: int,
                     threads: int = 1) -> list[TheoryComparison]:
    """Median of n^(-4/3) S_2 at p = 1/n for each n; their spread should stay bounded."""
    meds = {}
    for j, n in enumerate(n_list):
        if n < 1000:
            raise ValueError("critical scaling needs n >= 1000")
        cfg = ExperimentConfig(n=n, nt=None, p=1.0 / n, kmax=2, replicates=replicates,
                               master_seed=seed, kind="critical_scaling", threads=threads)
        vals = [snap.S[1] / n ** (4.0 / 3.0) for snap in iter_replicates(cfg, key=(j,))]
        meds[n] = statistics.median(vals)
    ratio = max(meds.values()) / min(meds.values())
    return [TheoryComparison(
        "critical_median_ratio", ratio, 1.0, None, "n^(-4/3) S_2 converges in law",
        "max/min of medians < 2", ratio < 2.0,
        {"medians": {str(k): v for k, v in meds.items()}},
    )]


def inverse_chi_scan(n_list: Sequence[int], nt_grid: Sequence[float], replicates: int,
                     seed: int, threads: int = 1) -> list[TheoryComparison]:
    """Worst median deviation of 1/chi from (1 - nt)_+ over a density grid, per n."""
    if len(n_list) != 2:
        raise ValueError("inverse-chi scan compares exactly two values of n")
    D = {}
    per_point = {}
    for j, n in enumerate(n_list):
        devs = []
        for g, nt in enumerate(nt_grid):
            if not 0.0 <= nt <= 2.0:
                raise ValueError("grid values must lie in [0, 2]")
            cfg = ExperimentConfig(n=n, nt=nt, kmax=2, replicates=replicates,
                                   master_seed=seed, kind="inverse_chi", threads=threads)
            target = max(1.0 - nt, 0.0)
            vals = [abs(1.0 / s.chi - target) for s in iter_replicates(cfg, key=(j, g))]
            devs.append(statistics.median(vals))
        D[n] = max(devs)
        per_point[str(n)] = devs
    n1, n2 = n_list
    ratio = D[n2] / D[n1] if D[n1] > 0 else math.inf
    return [TheoryComparison(
        "inverse_chi_D_ratio", ratio, (n1 / n2) ** (1.0 / 3.0), None,
        "1/chi = (1-np)_+ + O_p(n^(-1/3))", "D(n2)/D(n1) < 1", ratio < 1.0,
        {"D": {str(k): v for k, v in D.items()},
         "D_times_n^(1/3)": {str(k): v * k ** (1.0 / 3.0) for k, v in D.items()},
         "grid": list(nt_grid), "median_deviation": per_point},
    )]


def drift_check(n: int = 10_000, nt: float = 0.5, windows: int = 500, seed: int = 0,
                window_nt: float = 0.002) -> list[TheoryComparison]:
    """Mean increment rate of S_2 over short windows against the exact drift.

    Starting from one fixed graph, every vertex pair arrives at rate 1 during a
    window of length ``window_nt / n``; pairs already joined change nothing.
    """
    p, t = density_from_nt(n, nt)
    base_seed = derive_seed(seed, 0)
    rng = make_rng(base_seed)
    base = ComponentTracker(n, kmax=4)
    us, vs = sample_distinct_pairs(rng, n, int(rng.binomial(pair_count(n), p)))
    base.add_edges(us.tolist(), vs.tolist())
    v2 = base.drift_v(2)
    s2 = base.s(2)
    dt = window_nt / n
    rate = MomentAccumulator()
    N = pair_count(n)
    for w in range(windows):
        r = make_rng(derive_seed(seed, 1, w))
        arrivals = int(r.poisson(N * dt))
        u = r.integers(0, n, size=arrivals)
        v = (u + r.integers(1, n, size=arrivals)) % n
        tr = base.copy()
        tr.add_edges(u.tolist(), v.tolist())
        rate.push((tr.s(2) - s2) / dt)
    se = math.sqrt(rate.variance / rate.n)
    cmp_ = TheoryComparison(
        "drift_S2", rate.mean, float(v2), se, "dS_2/dt = V_2", "|z| < 3", False,
        {"window_length_times_n": window_nt, "windows": windows},
    )
    cmp_.verdict = abs(cmp_.z) < 3.0
    return [cmp_]


SUITES = ("subcritical", "lln", "clt", "covariance", "supercritical",
          "critical_scaling", "inverse_chi", "drift")


def run_suite(suite: str, *, n: int = 100_000, nt: float = 0.5, replicates: int = 200,
              seed: int = 0, kmax: int = 4, threads: int = 1, lam: float = 1.5,
              n_list: Sequence[int] | None = None, nt_grid: Sequence[float] | None = None,
              windows: int = 500) -> dict:
    """Run a named suite and build the report dictionary."""
    config: dict = {"suite": suite, "seed": seed, "replicates": replicates}
    if suite in ("subcritical", "lln"):
        cfg = ExperimentConfig(n=n, nt=nt, kmax=kmax, replicates=replicates,
                               master_seed=seed, kind="lln", threads=threads)
        config.update(cfg.as_dict())
        rows = lln_suite(cfg)
    elif suite in ("clt", "covariance"):
        cfg = ExperimentConfig(n=n, nt=nt, kmax=max(kmax, 3), replicates=replicates,
                               master_seed=seed, kind=suite, threads=threads)
        config.update(cfg.as_dict())
        rows = covariance_suite(cfg, normality=suite == "clt")
    elif suite == "supercritical":
        config.update({"n": n, "lambda": lam, "kmax": kmax})
        rows = supercritical_check(n, lam, replicates, seed, kmax=kmax, threads=threads)
    elif suite == "critical_scaling":
        n_list = list(n_list or (10_000, 40_000, 160_000))
        config["n_list"] = n_list
        rows = critical_scaling(n_list, replicates, seed, threads=threads)
    elif suite == "inverse_chi":
        n_list = list(n_list or (10_000, 80_000))
        nt_grid = list(nt_grid or (0.0, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0))
        config.update({"n_list": n_list, "nt_grid": nt_grid})
        rows = inverse_chi_scan(n_list, nt_grid, replicates, seed, threads=threads)
    elif suite == "drift":
        config.update({"n": n, "nt": nt, "windows": windows})
        rows = drift_check(n, nt, windows, seed)
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    stats = [r.as_dict() for r in rows]
    return {
        "config": config,
        "per_statistic": stats,
        "passed": all(r.verdict for r in rows),
    }
