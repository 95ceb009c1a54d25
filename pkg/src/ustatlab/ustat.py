"""Evaluation of generalized U-statistics, subgraph counts, and their exact moments."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import CapabilityError, ValidationError
from .graphon import GraphSample, condensed_to_adjacency
from .graphs import Motif, automorphism_count, canonical_form, isomorphic_embeddings, single_edge, triangle, two_star
from .kernels import Decomposition, HoeffdingComponent, Kernel, kernel_pairs, orbit_classes

MAX_TUPLES = 10**8
MAX_ORACLE_STATES = 10**7
CHUNK = 1 << 18


@dataclass(frozen=True)
class Configuration:
    """Atom indices ``x[i]`` for each vertex and ``y[i, j]`` for each pair.

    ``y`` is stored as a full symmetric ``n x n`` index matrix; the diagonal is unused.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.intp).ravel()
        y = np.asarray(self.y, dtype=np.intp)
        n = x.size
        if y.shape != (n, n):
            raise ValidationError(f"y must be {n}x{n}, got {y.shape}")
        iu = np.triu_indices(n, 1)
        if not np.array_equal(y[iu], y.T[iu]):
            raise ValidationError("y index matrix must be symmetric")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def from_pairs(cls, x: Sequence[int], y_pairs: dict[tuple[int, int], int]) -> "Configuration":
        n = len(x)
        y = np.zeros((n, n), dtype=np.intp)
        for i, j in itertools.combinations(range(n), 2):
            key = (i, j) if (i, j) in y_pairs else (j, i)
            if key not in y_pairs:
                raise ValidationError(f"missing y value for pair ({i}, {j})")
            y[i, j] = y[j, i] = y_pairs[key]
        return cls(np.asarray(x), y)

    @classmethod
    def from_adjacency(cls, adjacency: np.ndarray) -> "Configuration":
        """Erdos-Renyi indicator configuration: atom 0 is an edge, atom 1 a non-edge."""
        a = np.asarray(adjacency)
        n = a.shape[0]
        y = np.where(a > 0, 0, 1).astype(np.intp)
        return cls(np.zeros(n, dtype=np.intp), y)

    @classmethod
    def random(cls, f: Kernel, n: int, gen: np.random.Generator) -> "Configuration":
        x = gen.choice(f.x_space.size, size=n, p=f.x_space.probs)
        y = np.zeros((n, n), dtype=np.intp)
        iu = np.triu_indices(n, 1)
        y[iu] = gen.choice(f.y_space.size, size=iu[0].size, p=f.y_space.probs)
        return cls(x, y + y.T)


def index_tuples(n: int, k: int) -> Iterator[np.ndarray]:
    """Increasing ``k``-tuples of ``range(n)`` in lexicographic order, in chunks."""
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.intp).reshape(len(block), k)


def _check_n(f: Kernel, n: int) -> None:
    if n < f.k:
        raise ValidationError(f"n={n} is smaller than the kernel order k={f.k}")
    if math.comb(n, f.k) > MAX_TUPLES:
        raise CapabilityError(f"C({n},{f.k}) index tuples exceed the {MAX_TUPLES} limit")


def evaluate_ustat(f: Kernel, c: Configuration) -> float:
    """``S_{n,k}(f)``: the kernel summed over all increasing ``k``-tuples of vertices."""
    _check_n(f, c.n)
    total = 0.0
    for T in index_tuples(c.n, f.k):
        idx = [c.x[T[:, a]] for a in range(f.k)]
        idx += [c.y[T[:, i], T[:, j]] for i, j in f.pairs]
        total += float(np.sum(f.table[tuple(idx)]))
    return total


def evaluate_ustat_batch(f: Kernel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Vectorized ``S_{n,k}(f)`` for a stack of configurations ``x (R, n)``, ``y (R, n, n)``."""
    x = np.asarray(x)
    y = np.asarray(y)
    R, n = x.shape
    _check_n(f, n)
    out = np.zeros(R)
    for T in index_tuples(n, f.k):
        step = max(1, CHUNK // max(T.shape[0], 1))
        for r0 in range(0, R, step):
            xs, ys = x[r0:r0 + step], y[r0:r0 + step]
            idx = [xs[:, T[:, a]] for a in range(f.k)]
            idx += [ys[:, T[:, i], T[:, j]] for i, j in f.pairs]
            out[r0:r0 + step] += f.table[tuple(idx)].sum(axis=1)
    return out


# -- subgraph counts ----------------------------------------------------------------

def _embedding_lookup(F: Motif, mode: str) -> np.ndarray:
    """counts[code] for every edge pattern ``code`` (bitmask over pairs of [k])."""
    k = F.vertex_count
    pairs = kernel_pairs(k)
    bit = {e: 1 << t for t, e in enumerate(pairs)}
    masks = [sum(bit[e] for e in H) for H in isomorphic_embeddings(F, k)]
    codes = np.arange(1 << len(pairs))
    counts = np.zeros(codes.size, dtype=np.int64)
    for m in masks:
        counts += (codes & m) == m if mode == "inj" else codes == m
    return counts


def _count_bruteforce(adj: np.ndarray, F: Motif, mode: str) -> int:
    k = F.vertex_count
    n = adj.shape[0]
    lookup = _embedding_lookup(F, mode)
    total = 0
    for T in index_tuples(n, k):
        code = np.zeros(T.shape[0], dtype=np.int64)
        for t, (i, j) in enumerate(kernel_pairs(k)):
            code |= adj[T[:, i], T[:, j]].astype(np.int64) << t
        total += int(lookup[code].sum())
    return total


def _fast_kind(F: Motif) -> str | None:
    cf = canonical_form(F)
    for name, g in (("edge", single_edge()), ("two-star", two_star()), ("triangle", triangle())):
        if cf == canonical_form(g):
            return name
    return None


def _check_mode(mode: str) -> None:
    if mode not in ("inj", "ind"):
        raise ValidationError(f"mode must be 'inj' or 'ind', got {mode!r}")


def count_subgraphs(g: GraphSample | np.ndarray, F: Motif, mode: str = "inj") -> int:
    """Number of copies of ``F`` in ``g`` (as subgraphs, or induced with ``mode='ind'``)."""
    _check_mode(mode)
    adj = np.asarray(g.adjacency if isinstance(g, GraphSample) else g, dtype=np.int64)
    n = adj.shape[0]
    if F.vertex_count > n:
        raise ValidationError(f"motif has {F.vertex_count} vertices but the graph has {n}")
    kind = _fast_kind(F)
    if kind == "edge":
        return int(adj.sum()) // 2
    if kind == "triangle":
        return int(np.einsum("ij,ij->", adj @ adj, adj)) // 6
    if kind == "two-star":
        deg = adj.sum(axis=1)
        s = int(np.sum(deg * (deg - 1) // 2))
        if mode == "ind":
            s -= 3 * int(np.einsum("ij,ij->", adj @ adj, adj)) // 6
        return s
    return _count_bruteforce(adj, F, mode)


def count_subgraphs_batch(edges: np.ndarray, n: int, F: Motif, mode: str = "inj") -> np.ndarray:
    """Counts for a stack of graphs given as condensed ``(R, n(n-1)/2)`` indicators."""
    _check_mode(mode)
    if F.vertex_count > n:
        raise ValidationError(f"motif has {F.vertex_count} vertices but the graph has {n}")
    kind = _fast_kind(F)
    R = edges.shape[0]
    if kind == "edge":
        return edges.sum(axis=1, dtype=np.int64).astype(float)
    if kind is None:
        adj = condensed_to_adjacency(edges, n)
        return np.array([float(_count_bruteforce(a, F, mode)) for a in adj])
    # float32 matmul is exact while every partial sum stays below 2**24
    dtype = np.float32 if n**3 < (1 << 24) else np.float64
    out = np.empty(R)
    for r0 in range(0, R, 256):
        adj = condensed_to_adjacency(edges[r0:r0 + 256], n, dtype=dtype)
        deg = adj.sum(axis=2, dtype=np.float64)
        need_tri = kind == "triangle" or mode == "ind"
        tri = np.einsum("rij,rij->r", adj @ adj, adj, dtype=np.float64) / 6 if need_tri else 0.0
        if kind == "triangle":
            out[r0:r0 + 256] = tri
        else:
            s = np.sum(deg * (deg - 1) / 2, axis=1)
            out[r0:r0 + 256] = s - 3 * tri if mode == "ind" else s
    return np.rint(out)


# -- moments ----------------------------------------------------------------------------

def exact_mean(f: Kernel | Decomposition, n: int) -> float:
    kernel = f.kernel if isinstance(f, Decomposition) else f
    if n < kernel.k:
        raise ValidationError(f"n={n} is smaller than the kernel order k={kernel.k}")
    return math.comb(n, kernel.k) * kernel.mean()


@dataclass(frozen=True)
class ComponentRow:
    A: tuple[int, ...]
    B: tuple[tuple[int, int], ...]
    v: int
    sigma: float
    aut: int
    contribution: float


@dataclass(frozen=True)
class VarianceReport:
    n: int
    k: int
    sigma_n_sq: float
    per_level: dict[int, float]
    rows: tuple[ComponentRow, ...]
    convention: str = "orbit"
    per_component: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "per_component", {(r.A, r.B): r.contribution for r in self.rows})

    def to_text(self) -> str:
        def fmt_set(s):
            return "{" + ",".join(str(a) if isinstance(a, int) else f"{a[0]}{a[1]}" for a in s) + "}"

        lines = [
            f"# variance n={self.n} k={self.k} convention={self.convention}",
            f"sigma_n_sq\t{self.sigma_n_sq!r}",
        ]
        lines += [f"level\t{ell}\t{v!r}" for ell, v in sorted(self.per_level.items())]
        lines.append("A\tB\tv\tsigma\taut\tcontribution")
        for r in self.rows:
            lines.append(f"{fmt_set(r.A)}\t{fmt_set(r.B)}\t{r.v}\t{r.sigma!r}\t{r.aut}\t{r.contribution!r}")
        return "\n".join(lines) + "\n"


def variance_coefficient(n: int, k: int, ell: int, aut: int, per: str = "class") -> Fraction:
    """Exact factorial ratio multiplying ``sigma_{A,B}^2``.

    ``per='class'`` is ``n!(n-l)! / ((n-k)!^2 (k-l)!^2 |Aut|)``, the weight of one
    isomorphism class of marked support graphs. ``per='component'`` spreads it
    evenly over the ``k! / ((k-l)! |Aut|)`` labeled pairs in the class, which
    gives ``C(n,k) C(n-l,k-l)`` independent of the graph.
    """
    if per == "component":
        return Fraction(math.comb(n, k) * math.comb(n - ell, k - ell))
    num = math.factorial(n) * math.factorial(n - ell)
    den = math.factorial(n - k) ** 2 * math.factorial(k - ell) ** 2 * aut
    return Fraction(num, den)


def variance_closed_form(components: Decomposition, n: int, k: int | None = None,
                         convention: str = "orbit") -> VarianceReport:
    """Exact ``Var S_{n,k}(f)`` split by level and by component.

    ``convention='orbit'`` sums the factorial formula over isomorphism classes of
    ``(A, B)`` with automorphisms that preserve ``A``; this matches brute-force
    enumeration. ``convention='subset'`` applies the same coefficient to every
    labeled pair with the plain automorphism count of ``G_{A,B}``, which
    overcounts whenever a class has more than one member. It is kept for
    comparison only.
    """
    f = components.kernel
    k = f.k if k is None else k
    if k != f.k:
        raise ValidationError(f"k={k} does not match the kernel order {f.k}")
    if n < k:
        raise ValidationError(f"n={n} is smaller than the kernel order k={k}")
    if convention not in ("orbit", "subset"):
        raise ValidationError(f"unknown convention {convention!r}")
    rows = []
    for c in components:
        if c.v == 0:
            continue
        if convention == "orbit":
            coef = variance_coefficient(n, k, c.v, c.aut, per="component")
            aut = c.aut
        else:
            aut = automorphism_count(c.support_graph)
            coef = variance_coefficient(n, k, c.v, aut, per="class")
        rows.append(ComponentRow(c.A, c.B, c.v, c.sigma, aut, float(coef) * c.sigma**2))
    per_level: dict[int, float] = {}
    for r in rows:
        per_level[r.v] = per_level.get(r.v, 0.0) + r.contribution
    return VarianceReport(n, k, math.fsum(r.contribution for r in rows), per_level, tuple(rows), convention)


def variance_by_class(components: Decomposition, n: int) -> dict[int, float]:
    """Per-level variance from the class-sum form, using one representative per class."""
    k = components.kernel.k
    out: dict[int, float] = {}
    for members in orbit_classes([c for c in components if c.v > 0]).values():
        rep: HoeffdingComponent = members[0]
        coef = variance_coefficient(n, k, rep.v, rep.aut, per="class")
        out[rep.v] = out.get(rep.v, 0.0) + float(coef) * rep.sigma**2
    return out


def _digits(count: int, base: int, width: int) -> np.ndarray:
    if width == 0:
        return np.zeros((1, 0), dtype=np.intp)
    return np.stack(np.unravel_index(np.arange(count), (base,) * width), axis=1)


def variance_oracle(f: Kernel, n: int) -> float:
    """Exact ``Var S_{n,k}(f)`` by enumerating every configuration with its probability."""
    if n < f.k:
        raise ValidationError(f"n={n} is smaller than the kernel order k={f.k}")
    P = n * (n - 1) // 2
    nx, ny = f.x_space.size, f.y_space.size
    states = nx**n * ny**P
    if states > MAX_ORACLE_STATES:
        raise CapabilityError(f"{states} configurations exceed the {MAX_ORACLE_STATES} limit")
    X = _digits(nx**n, nx, n)
    Y = _digits(ny**P, ny, P)
    pair_col = {e: t for t, e in enumerate(kernel_pairs(n))}
    S = np.zeros((X.shape[0], Y.shape[0]))
    for alpha in itertools.combinations(range(n), f.k):
        idx = [X[:, alpha[a]][:, None] for a in range(f.k)]
        idx += [Y[:, pair_col[(alpha[i], alpha[j])]][None, :] for i, j in f.pairs]
        S += f.table[tuple(idx)]
    px = np.prod(f.x_space.probs[X], axis=1)
    py = np.prod(f.y_space.probs[Y], axis=1)
    w = np.multiply.outer(px, py)
    mean = np.sum(w * S)
    return float(np.sum(w * (S - mean) ** 2))
