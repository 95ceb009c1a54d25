"""Monte Carlo rate experiments: simulate standardized statistics, measure the
Kolmogorov distance to N(0, 1), and fit the decay exponent on a log-log scale."""

from __future__ import annotations

import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import ndtr

from . import rng
from .errors import DegenerateFitError, DegenerateKernelError, NonNormalRegimeError, ValidationError
from .graphon import StepGraphon, sample_condensed
from .graphs import Motif, format_motif, motif_stats
from .kernels import Decomposition, Kernel, KernelSummary, hoeffding_decompose, subgraph_kernel, summarize
from .ustat import count_subgraphs_batch, evaluate_ustat_batch, exact_mean, variance_closed_form

KS_CONST = 1.3581
MIN_REPLICATES = 1000
CHUNK_REPLICATES = 2048
RATE_WINDOWS = {-1.0: (-1.25, -0.75), -0.5: (-0.7, -0.3)}
MIN_R_SQUARED = 0.95


def normal_cdf(z):
    """Standard normal distribution function (``scipy.special.ndtr``)."""
    return ndtr(z)


@dataclass(frozen=True)
class ExperimentSpec:
    """One rate experiment.

    Give either ``motif`` (with ``mode``; the statistic is the subgraph count in
    ``G(n, graphon)``) or a general ``kernel`` whose coordinates are drawn from
    its own alphabets.
    """

    n_grid: tuple[int, ...]
    replicates: int
    seed: int = 0
    motif: Motif | None = None
    mode: str = "inj"
    graphon: StepGraphon | None = None
    kernel: Kernel | None = None
    standardization: str = "exact"

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        if (self.motif is None) == (self.kernel is None):
            raise ValidationError("give exactly one of motif or kernel")
        if self.motif is not None and self.graphon is None:
            raise ValidationError("a motif experiment needs a graphon")
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("n_grid must be nonempty and strictly increasing")
        if grid[0] < self.k:
            raise ValidationError(f"every n must be at least k={self.k}")
        if self.replicates < MIN_REPLICATES:
            raise ValidationError(f"need at least {MIN_REPLICATES} replicates, got {self.replicates}")
        if self.standardization not in ("exact", "plugin"):
            raise ValidationError("standardization must be 'exact' or 'plugin'")
        if self.mode not in ("inj", "ind"):
            raise ValidationError(f"mode must be 'inj' or 'ind', got {self.mode!r}")

    @property
    def k(self) -> int:
        return self.motif.vertex_count if self.motif is not None else self.kernel.k

    def statistic_kernel(self) -> Kernel:
        if self.kernel is not None:
            return self.kernel
        return subgraph_kernel(self.motif, self.graphon, self.mode)

    def describe(self) -> dict:
        """Everything that determines the output bytes (thread count excluded)."""
        d = {
            "n_grid": list(self.n_grid),
            "replicates": self.replicates,
            "seed": self.seed,
            "standardization": self.standardization,
        }
        if self.motif is not None:
            d["motif"] = format_motif(self.motif)
            d["mode"] = self.mode
            d["graphon"] = self.graphon.to_dict()
        else:
            d["kernel"] = self.kernel.to_dict()
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _raw_chunk(spec: ExperimentSpec, f: Kernel, n: int, reps: range) -> np.ndarray:
    if spec.motif is not None:
        _, edges = sample_condensed(spec.graphon, n, spec.seed, reps)
        return count_subgraphs_batch(edges, n, spec.motif, spec.mode)
    P = n * (n - 1) // 2
    xs = np.empty((len(reps), n), dtype=np.intp)
    y = np.zeros((len(reps), n, n), dtype=np.intp)
    iu = np.triu_indices(n, 1)
    for t, r in enumerate(reps):
        w = rng.words(rng.stream(spec.seed, n, r), n + P)
        xs[t] = rng.categorical(w[:n], f.x_space.probs)
        yc = rng.categorical(w[n:], f.y_space.probs)
        y[t, iu[0], iu[1]] = yc
        y[t, iu[1], iu[0]] = yc
    return evaluate_ustat_batch(f, xs, y)


def simulate_raw(spec: ExperimentSpec, n: int, threads: int = 1) -> np.ndarray:
    """Unstandardized statistic for replicates ``0..m-1`` at one ``n``.

    Replicates are cut into fixed chunks that do not depend on ``threads`` and
    reassembled in order, so the result is identical for any thread count.
    """
    f = spec.statistic_kernel() if spec.kernel is not None else None
    chunks = [range(a, min(a + CHUNK_REPLICATES, spec.replicates))
              for a in range(0, spec.replicates, CHUNK_REPLICATES)]
    if threads <= 1:
        parts = [_raw_chunk(spec, f, n, c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _raw_chunk(spec, f, n, c), chunks))
    return np.concatenate(parts)


@dataclass
class Simulation:
    spec: ExperimentSpec
    samples: dict[int, np.ndarray]
    moments: dict[int, tuple[float, float]]
    summary: KernelSummary | None


def simulate(spec: ExperimentSpec, threads: int = 1) -> Simulation:
    """Standardized samples ``(S - E S) / sd(S)`` for every ``n`` in the grid."""
    decomp: Decomposition | None = None
    summary = None
    if spec.standardization == "exact":
        decomp = hoeffding_decompose(spec.statistic_kernel())
        summary = summarize(decomp)
    samples, moments = {}, {}
    for n in spec.n_grid:
        raw = simulate_raw(spec, n, threads)
        if decomp is not None:
            mean = exact_mean(decomp, n)
            var = variance_closed_form(decomp, n).sigma_n_sq
        else:
            mean = float(np.mean(raw))
            var = float(np.var(raw, ddof=1))
        if var <= 0:
            raise DegenerateKernelError(f"statistic has zero variance at n={n}")
        samples[n] = (raw - mean) / math.sqrt(var)
        moments[n] = (mean, var)
    return Simulation(spec, samples, moments, summary)


def ks_statistic(samples) -> float:
    """``sup_z |F_m(z) - Phi(z)|``, attained at an order statistic."""
    w = np.sort(np.asarray(samples, dtype=float).ravel())
    m = w.size
    if m == 0:
        raise ValidationError("ks_statistic needs at least one sample")
    cdf = normal_cdf(w)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


def ks_noise_floor(m: int) -> float:
    return KS_CONST / math.sqrt(m)


def fit_rate(points) -> tuple[float, float, float]:
    """Least-squares line through ``(log n, log ks)``: ``(slope, intercept, r_squared)``."""
    pts = [(float(n), float(d)) for n, d in points]
    if len(pts) < 2:
        raise DegenerateFitError("need at least two points to fit a rate")
    if any(d <= 0 for _, d in pts):
        raise DegenerateFitError("zero Kolmogorov distance: the rate is not finite")
    x = np.log([n for n, _ in pts])
    y = np.log([d for _, d in pts])
    if np.ptp(x) == 0:
        raise DegenerateFitError("all points share one n")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    sst = float(np.sum((y - y.mean()) ** 2))
    sse = float(np.sum(resid**2))
    r2 = 1.0 if sst == 0 or sse <= 1e-30 * max(sst, 1.0) else 1.0 - sse / sst
    return float(slope), float(intercept), r2


def _as_fraction(p) -> Fraction:
    if isinstance(p, Fraction):
        return p
    q = Fraction(p)
    near = q.limit_denominator(10**6)
    return near if abs(float(near) - float(p)) <= 1e-12 else q


def classify_induced(F: Motif, p) -> str:
    """Which of the conditions G1, G2, G3 first separates ``F`` from a typical G(n, p) pattern.

    Comparisons are exact in rationals; a float ``p`` within 1e-12 of a
    fraction with denominator at most 10^6 is read as that fraction.
    """
    q = _as_fraction(p)
    if not 0 < q < 1:
        raise ValidationError(f"p must lie in (0, 1), got {p}")
    v = F.vertex_count
    st = motif_stats(F)
    c2, c3 = math.comb(v, 2), math.comb(v, 3)
    if st.edge_count != q * c2:
        return "G1"
    if st.two_star_count != 3 * q**2 * c3:
        return "G2"
    if st.triangle_count != q**3 * c3:
        return "G3"
    return "NONNORMAL"


CASE_RATES = {"G1": -1.0, "G2": -0.5, "G3": -1.0, "NONNORMAL": None}


def predicted_rate(summary: KernelSummary):
    """Exponent of the Berry-Esseen rate implied by the principal structure."""
    if not summary.all_connected:
        return "nonnormal"
    if summary.d == 1:
        return -0.5
    if not summary.depends_on_x and summary.all_strongly_connected:
        return -1.0
    return -0.5


@dataclass(frozen=True)
class RatePoint:
    n: int
    ks: float
    stderr: float
    used: bool


@dataclass
class RateReport:
    points: list[RatePoint]
    slope: float
    intercept: float
    r_squared: float
    predicted_rate: float | str
    standardization: str
    config_hash: str
    seed: int
    notes: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        window = RATE_WINDOWS.get(self.predicted_rate)
        if window is None:
            return "nonnormal"
        ok = window[0] <= self.slope <= window[1] and self.r_squared >= MIN_R_SQUARED
        return "pass" if ok else "fail"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# config_hash={self.config_hash} seed={self.seed} standardization={self.standardization}\n")
        buf.write("n,ks,stderr\n")
        for p in self.points:
            buf.write(f"{p.n},{p.ks!r},{p.stderr!r}\n")
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "predicted_rate": self.predicted_rate,
            "verdict": self.verdict,
            "points_used": [p.n for p in self.points if p.used],
            "standardization": self.standardization,
            "notes": list(self.notes),
        }


def rate_report(sim: Simulation, predicted, exclude_noise: bool = True) -> RateReport:
    spec = sim.spec
    pts = []
    floor = ks_noise_floor(spec.replicates)
    for n in spec.n_grid:
        d = ks_statistic(sim.samples[n])
        pts.append(RatePoint(n, d, floor, not exclude_noise or d > 3 * floor))
    notes = []
    if spec.standardization == "plugin":
        notes.append("plugin standardization perturbs each distance by O(m^-1/2)")
    used = [(p.n, p.ks) for p in pts if p.used]
    if len(used) < 2:
        notes.append("fewer than two points above three noise floors; fitted on all points")
        used = [(p.n, p.ks) for p in pts]
        pts = [RatePoint(p.n, p.ks, p.stderr, True) for p in pts]
    dropped = [p.n for p in pts if not p.used]
    if dropped:
        notes.append(f"noise-limited points excluded from the fit: {dropped}")
    slope, intercept, r2 = fit_rate(used)
    return RateReport(pts, slope, intercept, r2, predicted, spec.standardization,
                      spec.config_hash(), spec.seed, notes)


def verify_rate(spec: ExperimentSpec, threads: int = 1) -> RateReport:
    """Run the experiment and compare the fitted exponent with the predicted one.

    Refuses (NonNormalRegimeError) when a principal support graph is
    disconnected, since no normal rate is predicted there.
    """
    summary = summarize(hoeffding_decompose(spec.statistic_kernel()))
    predicted = predicted_rate(summary)
    if predicted == "nonnormal":
        raise NonNormalRegimeError("principal support graph disconnected: no normal rate to verify")
    return rate_report(simulate(spec, threads), predicted)
