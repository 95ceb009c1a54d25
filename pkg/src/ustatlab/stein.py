"""Exchangeable pairs for generalized U-statistics and the normal Stein equation.

Both constructions are checked by exact summation: the conditional
expectation of ``D`` given the configuration averages over the resampled
coordinate and its replacement atom, and ``E{D | ...} = lambda (W + R)`` is
compared with ``R = 0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import log_ndtr, ndtr

from .errors import InapplicableConstructionError, NonNormalRegimeError, ValidationError
from .kernels import Decomposition, HoeffdingComponent, KernelSummary, hoeffding_decompose, level_kernel, orbit_classes, summarize
from .kernels import Kernel, _support
from .ustat import Configuration, _digits, evaluate_ustat_batch, variance_closed_form

MAX_CONFIGS = 1 << 16
LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


def coefficients(A, B, n: int, k: int) -> tuple[float, float]:
    """``(mu, nu)`` for the support pair ``(A, B)``.

    ``mu = C(n - v, n - k) / (|Aut| |B|)`` and ``nu = |B| mu``, with ``|Aut|``
    counting automorphisms of ``G_{A,B}`` that preserve ``A``.
    """
    A = tuple(sorted(A))
    B = tuple(sorted(tuple(sorted(e)) for e in B))
    if n < k:
        raise ValidationError(f"n={n} is smaller than k={k}")
    if not B:
        raise ValidationError("mu is undefined for an empty edge set B")
    _, v, aut = _support(A, B)
    if v > k:
        raise ValidationError(f"support pair uses {v} vertices but k={k}")
    mu = Fraction(math.comb(n - v, n - k), aut * len(B))
    return float(mu), float(mu * len(B))


@dataclass(frozen=True)
class PairPerturbation:
    """Configuration with ``Y_{ij}`` replaced by the atom index ``y_new``."""

    base: Configuration
    i: int
    j: int
    y_new: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValidationError("a pair perturbation needs i != j")

    def apply(self) -> Configuration:
        y = self.base.y.copy()
        y[self.i, self.j] = y[self.j, self.i] = self.y_new
        return Configuration(self.base.x, y)


@dataclass(frozen=True)
class SteinPairReport:
    construction: str
    n: int
    lam: float
    linearity_residual: float
    r_term: float
    d_delta_mean: float
    variance_ratio: float
    antisymmetry_error: float
    configurations: int
    exhaustive: bool
    worst_config: int

    def to_text(self) -> str:
        return "\n".join([
            f"construction\t{self.construction}",
            f"n\t{self.n}",
            f"lambda\t{self.lam!r}",
            f"residual\t{self.linearity_residual!r}",
            f"r_term\t{self.r_term!r}",
            f"d_delta_mean\t{self.d_delta_mean!r}",
            f"variance_ratio\t{self.variance_ratio!r}",
            f"antisymmetry_error\t{self.antisymmetry_error!r}",
            f"configurations\t{self.configurations}",
            f"exhaustive\t{str(self.exhaustive).lower()}",
            f"worst_config\t{self.worst_config}",
        ]) + "\n"


def _configurations(f: Kernel, n: int, samples: int | None, seed: int, x_only: bool = False):
    """All configurations with probabilities if few enough, else ``samples`` random ones."""
    P = 0 if x_only else n * (n - 1) // 2
    nx, ny = f.x_space.size, f.y_space.size
    total = nx**n * ny**P
    if samples is None and total <= MAX_CONFIGS:
        X = _digits(nx**n, nx, n)
        Y = _digits(ny**P, ny, P)
        xs = np.repeat(X, Y.shape[0], axis=0)
        ys = np.tile(Y, (X.shape[0], 1))
        w = np.prod(f.x_space.probs[xs], axis=1) * np.prod(f.y_space.probs[ys], axis=1)
        exhaustive = True
    else:
        gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
        m = samples or 100
        xs = gen.choice(nx, size=(m, n), p=f.x_space.probs)
        ys = gen.choice(ny, size=(m, P), p=f.y_space.probs)
        w = np.full(m, 1.0 / m)
        exhaustive = False
    y = np.zeros((xs.shape[0], n, n), dtype=np.intp)
    if P:
        iu = np.triu_indices(n, 1)
        y[:, iu[0], iu[1]] = ys
        y[:, iu[1], iu[0]] = ys
    return xs, y, w, exhaustive


def _sigma_n(decomp: Decomposition, n: int) -> tuple[float, dict[int, float]]:
    rep = variance_closed_form(decomp, n)
    if rep.sigma_n_sq <= 0:
        raise InapplicableConstructionError("statistic has zero variance")
    return math.sqrt(rep.sigma_n_sq), rep.per_level


def check_linearity_x_swap(f: Kernel, n: int, samples: int | None = None, seed: int = 0,
                           decomp: Decomposition | None = None) -> SteinPairReport:
    """Resample one vertex variable: ``D = C(n-1, k-1) (f_1(X_I) - f_1(X'_I)) / sigma_n``.

    Checks ``E{D | X} = W / n`` where ``W = S_{n,k}(f_(1)) / sigma_n``.
    """
    decomp = decomp or hoeffding_decompose(f)
    s = summarize(decomp)
    if s.sigma1 == 0.0:
        raise InapplicableConstructionError("sigma_1 = 0: the vertex-resampling pair needs a nonzero first projection")
    if n < f.k:
        raise ValidationError(f"n={n} is smaller than k={f.k}")
    sigma_n, per_level = _sigma_n(decomp, n)
    f1 = decomp[((0,), ())].table
    px = f.x_space.probs
    xs, y, w, exhaustive = _configurations(f, n, samples, seed, x_only=True)
    c = math.comb(n - 1, f.k - 1)
    W = evaluate_ustat_batch(level_kernel(decomp, 1), xs, np.zeros((xs.shape[0], n, n), np.intp)) / sigma_n
    cond = np.zeros(xs.shape[0])
    dd = np.zeros(xs.shape[0])
    anti = 0.0
    for i in range(n):
        for a in range(f.x_space.size):
            D = c * (f1[xs[:, i]] - f1[a]) / sigma_n
            back = c * (f1[a] - f1[xs[:, i]]) / sigma_n
            anti = max(anti, float(np.max(np.abs(D + back))))
            cond += px[a] * D / n
            dd += px[a] * D * D / n  # Delta = W - W' coincides with D here
    lam = 1.0 / n
    resid = np.abs(cond - lam * W)
    return SteinPairReport(
        "x-swap", n, lam, float(resid.max()), 0.0,
        float(np.sum(w * dd)) / (2 * lam), per_level.get(1, 0.0) / sigma_n**2,
        anti, xs.shape[0], exhaustive, int(np.argmax(resid)),
    )


def _principal_classes(decomp: Decomposition, s: KernelSummary) -> list[HoeffdingComponent]:
    """One representative per isomorphism class of principal support pairs."""
    principal = s.principal_components(decomp)
    reps = []
    for members in orbit_classes(principal).values():
        # a representative whose support is exactly {0..d-1}
        rep = next((c for c in members if c.vertices == tuple(range(s.d))), None)
        reps.append(rep if rep is not None else members[0])
    return reps


def _weighted_sum(reps, mus, d: int, xs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``sum_alpha sum_G mu_G f_G(alpha)`` over injective maps ``alpha: [d] -> [n]``."""
    n = xs.shape[1]
    alphas = np.array(list(itertools.permutations(range(n), d)), dtype=np.intp)
    out = np.zeros(xs.shape[0])
    for rep, mu in zip(reps, mus):
        pos = {u: t for t, u in enumerate(rep.vertices)}
        idx = [xs[:, alphas[:, pos[a]]] for a in rep.A]
        idx += [y[:, alphas[:, pos[i]], alphas[:, pos[j]]] for i, j in rep.B]
        out += mu * rep.table[tuple(idx)].sum(axis=1)
    return out


def check_linearity_edge_swap(f: Kernel, n: int, samples: int | None = None, seed: int = 0,
                              decomp: Decomposition | None = None) -> SteinPairReport:
    """Resample one edge variable and check ``E{D | X, Y} = 2 W / (n (n-1))``.

    ``W = S_{n,k}(f_(d)) / sigma_n`` is the principal part, evaluated
    independently of ``D`` from the level-``d`` kernel.
    """
    decomp = decomp or hoeffding_decompose(f)
    s = summarize(decomp)
    if s.d == 1:
        raise InapplicableConstructionError("principal degree 1: use the vertex-resampling pair")
    if not s.all_connected:
        raise NonNormalRegimeError("a principal support graph is disconnected")
    reps = _principal_classes(decomp, s)
    if any(not r.B for r in reps):
        raise InapplicableConstructionError(
            "a principal component has no edge coordinates, so resampling one edge cannot see it"
        )
    if n < f.k:
        raise ValidationError(f"n={n} is smaller than k={f.k}")
    d = s.d
    sigma_n, per_level = _sigma_n(decomp, n)
    mus = [coefficients(r.A, r.B, n, f.k)[0] for r in reps]
    fd = level_kernel(decomp, d)
    xs, y, w, exhaustive = _configurations(f, n, samples, seed)
    T0 = _weighted_sum(reps, mus, d, xs, y)
    W0 = evaluate_ustat_batch(fd, xs, y) / sigma_n
    py = f.y_space.probs
    pairs = list(itertools.combinations(range(n), 2))
    cond = np.zeros(xs.shape[0])
    dd = np.zeros(xs.shape[0])
    anti = 0.0
    for i, j in pairs:
        for b in range(f.y_space.size):
            y2 = y.copy()
            y2[:, i, j] = y2[:, j, i] = b
            T1 = _weighted_sum(reps, mus, d, xs, y2)
            D = (T0 - T1) / sigma_n
            anti = max(anti, float(np.max(np.abs(D + (T1 - T0) / sigma_n))))
            delta = W0 - evaluate_ustat_batch(fd, xs, y2) / sigma_n
            # ordered pairs (i, j) and (j, i) give the same perturbation
            cond += py[b] * D / len(pairs)
            dd += py[b] * D * delta / len(pairs)
    lam = 2.0 / (n * (n - 1))
    resid = np.abs(cond - lam * W0)
    return SteinPairReport(
        "edge-swap", n, lam, float(resid.max()), 0.0,
        float(np.sum(w * dd)) / (2 * lam), per_level.get(d, 0.0) / sigma_n**2,
        anti, xs.shape[0], exhaustive, int(np.argmax(resid)),
    )


def berry_esseen_bound(summary: KernelSummary, k: int, n: int) -> float:
    """Explicit Kolmogorov bound ``12 k tau^2 / (sqrt(n) sigma_1^2)`` for ``sigma_1 > 0``."""
    if summary.sigma1 <= 0:
        raise InapplicableConstructionError("bound requires sigma_1 > 0")
    if n < 1:
        raise ValidationError("n must be >= 1")
    return 12 * k * summary.tau**2 / (math.sqrt(n) * summary.sigma1**2)


def _log_mills(w):
    """``log(Phi(w) / phi(w))``."""
    w = np.asarray(w, dtype=float)
    return log_ndtr(w) + 0.5 * w * w + LOG_SQRT_2PI


def stein_solution(z, w):
    """Bounded solution ``f_z`` of ``f'(w) - w f(w) = 1{w <= z} - Phi(z)``.

    ``f_z(w) = sqrt(2 pi) e^{w^2/2} Phi(w) (1 - Phi(z))`` for ``w <= z`` and the
    mirror image ``sqrt(2 pi) e^{w^2/2} Phi(z) (1 - Phi(w))`` otherwise,
    computed in log space so neither factor overflows.
    """
    z, w = np.broadcast_arrays(np.asarray(z, float), np.asarray(w, float))
    left = np.exp(_log_mills(w) + log_ndtr(-z))
    right = np.exp(_log_mills(-w) + log_ndtr(z))
    out = np.where(w <= z, left, right)
    return out[()] if out.ndim == 0 else out


def stein_solution_derivative(z, w):
    """Analytic ``f_z'(w)``.

    With ``M(w) = Phi(w)/phi(w)`` one has ``M' = 1 + w M``, so the left branch
    differentiates to ``(1 + w M(w)) (1 - Phi(z))`` and the right branch to
    ``-(1 - w M(-w)) Phi(z)``.
    """
    z, w = np.broadcast_arrays(np.asarray(z, float), np.asarray(w, float))
    left = ndtr(-z) + w * np.exp(_log_mills(w) + log_ndtr(-z))
    right = -ndtr(z) + w * np.exp(_log_mills(-w) + log_ndtr(z))
    out = np.where(w <= z, left, right)
    return out[()] if out.ndim == 0 else out
