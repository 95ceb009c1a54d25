"""Symmetric kernels on finite alphabets and their exact Hoeffding decomposition.

A kernel of order ``k`` is a dense table indexed by ``k`` vertex coordinates
``x_1..x_k`` followed by one edge coordinate ``y_ij`` per pair ``i < j`` (in
lexicographic order). Coordinates are independent, so every conditional
expectation is a probability-weighted average over the remaining axes and the
projection onto a coordinate set ``S`` is

    f_S = prod_{a in S} (I - E_a)  prod_{a not in S} E_a  f,

which is the inclusion-exclusion sum over sub-pairs written as a product of
commuting operators.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import CapabilityError, DegenerateKernelError, ParseError, ValidationError
from .graphon import StepGraphon
from .graphs import (
    Motif,
    automorphism_count,
    is_connected,
    is_strongly_connected,
    isomorphic_embeddings,
    load_motif,
    motif_stats,
)

MAX_JOINT_STATES = 10**8
MAX_ORDER = 5
ZERO_TOL = 1e-9

Edge = tuple[int, int]


def kernel_pairs(k: int) -> list[Edge]:
    return list(itertools.combinations(range(k), 2))


@dataclass(frozen=True)
class DiscreteSpace:
    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if a.size == 0:
            raise ValidationError("a discrete space needs at least one atom")
        if a.size != p.size:
            raise ValidationError(f"{a.size} atoms but {p.size} probabilities")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("probabilities must be nonnegative and sum to 1")
        a.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "probs", p)

    @property
    def size(self) -> int:
        return self.atoms.size

    @classmethod
    def point(cls, value: float = 0.0) -> "DiscreteSpace":
        return cls([value], [1.0])

    @classmethod
    def bernoulli(cls, p: float) -> "DiscreteSpace":
        """Edge indicator law: atom 0 carries value 1 (edge), atom 1 value 0."""
        return cls([1.0, 0.0], [p, 1.0 - p])

    @classmethod
    def uniform(cls, atoms: Sequence[float]) -> "DiscreteSpace":
        return cls(atoms, np.full(len(atoms), 1.0 / len(atoms)))


class Kernel:
    """Real function of ``(x_1..x_k; y_12..y_{k-1,k})`` stored as an exact table.

    ``table[i_1, ..., i_k, j_12, ...]`` is the value at x atoms ``i`` and y
    atoms ``j``; the flat C-order ravel of the table is the canonical
    mixed-radix encoding used in kernel files.
    """

    def __init__(self, k: int, x_space: DiscreteSpace, y_space: DiscreteSpace, table):
        if not 1 <= k <= MAX_ORDER:
            raise ValidationError(f"kernel order must be in 1..{MAX_ORDER}, got {k}")
        self.k = int(k)
        self.x_space = x_space
        self.y_space = y_space
        self.pairs = kernel_pairs(k)
        shape = (x_space.size,) * k + (y_space.size,) * len(self.pairs)
        t = np.asarray(table, dtype=float)
        if t.size != math.prod(shape):
            raise ValidationError(f"table has {t.size} entries, expected {math.prod(shape)}")
        t = t.reshape(shape).copy()
        t.setflags(write=False)
        self.table = t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.table.shape

    @property
    def ndim(self) -> int:
        return self.table.ndim

    def axis_probs(self) -> list[np.ndarray]:
        return [self.x_space.probs] * self.k + [self.y_space.probs] * len(self.pairs)

    def joint_probs(self) -> np.ndarray:
        w = np.ones(())
        for p in self.axis_probs():
            w = np.multiply.outer(w, p)
        return w

    def mean(self) -> float:
        return float(np.sum(self.joint_probs() * self.table))

    def norm(self, q: float = 2.0) -> float:
        return float(np.sum(self.joint_probs() * np.abs(self.table) ** q) ** (1.0 / q))

    @property
    def depends_on_x(self) -> bool:
        t = self.table
        for a in range(self.k):
            if not np.all(t == np.take(t, [0], axis=a)):
                return True
        return False

    @classmethod
    def from_function(cls, k: int, x_space: DiscreteSpace, y_space: DiscreteSpace,
                      fn: Callable[[tuple, tuple], float]) -> "Kernel":
        """Tabulate ``fn(x_values, y_values)`` over every joint assignment of atom values."""
        P = k * (k - 1) // 2
        shape = (x_space.size,) * k + (y_space.size,) * P
        table = np.empty(shape)
        for idx in np.ndindex(*shape):
            xv = tuple(x_space.atoms[i] for i in idx[:k])
            yv = tuple(y_space.atoms[j] for j in idx[k:])
            table[idx] = fn(xv, yv)
        return cls(k, x_space, y_space, table)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "x_atoms": self.x_space.atoms.tolist(),
            "x_probs": self.x_space.probs.tolist(),
            "y_atoms": self.y_space.atoms.tolist(),
            "y_probs": self.y_space.probs.tolist(),
            "table": self.table.ravel().tolist(),
        }

    def __repr__(self) -> str:
        return f"Kernel(k={self.k}, |X|={self.x_space.size}, |Y|={self.y_space.size})"


# -- builtin kernels -----------------------------------------------------------

def graphon_y_space(kappa: StepGraphon) -> tuple[DiscreteSpace, np.ndarray]:
    """Exact discretization of the uniform edge variable for a step graphon.

    The distinct kappa values cut [0,1] into intervals; atom ``a`` is the
    interval ending at ``cuts[a]``. Returns the space and the cut array, with
    ``Y <= kappa`` iff ``cuts[a] <= kappa``.
    """
    cuts = np.unique(np.concatenate([kappa.values.ravel(), [1.0]]))
    cuts = cuts[cuts > 0.0]
    lower = np.concatenate([[0.0], cuts[:-1]])
    return DiscreteSpace(cuts, cuts - lower), cuts


def subgraph_kernel(F: Motif, model, mode: str = "inj") -> Kernel:
    """Kernel ``phi_F`` counting copies of ``F`` on a ``k = v(F)`` vertex set.

    ``model`` is an edge probability ``p`` (Erdos-Renyi, indicator alphabet
    ``{1, 0}``) or a :class:`StepGraphon` (block-index X alphabet and the
    interval discretization of Y).
    """
    if mode not in ("inj", "ind"):
        raise ValidationError(f"mode must be 'inj' or 'ind', got {mode!r}")
    kappa = model if isinstance(model, StepGraphon) else StepGraphon.constant(float(model))
    k = F.vertex_count
    pairs = kernel_pairs(k)
    P = len(pairs)
    if kappa.blocks == 1:
        p = float(kappa.values[0, 0])
        if not 0.0 < p < 1.0:
            raise ValidationError(f"edge probability must be in (0, 1), got {p}")
        x_space = DiscreteSpace.point(0.0)
        y_space = DiscreteSpace.bernoulli(p)
        ind_y = np.array([1.0, 0.0])
        # xi for each pair: shape (ny,) placed on that pair's axis
        xis = []
        for t in range(P):
            shp = [1] * (k + P)
            shp[k + t] = 2
            xis.append(ind_y.reshape(shp))
    else:
        b = kappa.blocks
        x_space = DiscreteSpace.uniform(np.arange(b, dtype=float))
        y_space, cuts = graphon_y_space(kappa)
        ny = y_space.size
        # below[x, x', a] = 1[cuts[a] <= kappa(x, x')]
        below = (cuts[None, None, :] <= kappa.values[:, :, None]).astype(float)
        xis = []
        for t, (i, j) in enumerate(pairs):
            shp = [1] * (k + P)
            shp[i] = b
            shp[j] = b
            shp[k + t] = ny
            xis.append(below.reshape(shp))
    shape = (x_space.size,) * k + (y_space.size,) * P
    table = np.zeros(shape)
    for H in isomorphic_embeddings(F, k):
        term = np.ones(shape)
        for t, e in enumerate(pairs):
            if e in H:
                term = term * xis[t]
            elif mode == "ind":
                term = term * (1.0 - xis[t])
        table += term
    return Kernel(k, x_space, y_space, table)


def constant_kernel(k: int, c: float, x_space: DiscreteSpace | None = None,
                    y_space: DiscreteSpace | None = None) -> Kernel:
    xs = x_space or DiscreteSpace.point()
    ys = y_space or DiscreteSpace.point()
    return Kernel(k, xs, ys, np.full((xs.size,) * k + (ys.size,) * (k * (k - 1) // 2), float(c)))


def load_kernel(path) -> Kernel:
    """Read a kernel file: a builtin subgraph kernel or an explicit flat table."""
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, str(p)) from None
    return kernel_from_dict(d, base=p.parent)


def kernel_from_dict(d: dict, base: Path | None = None) -> Kernel:
    base = base or Path(".")
    if "builtin" in d:
        name = d["builtin"]
        if name not in ("subgraph-inj", "subgraph-ind"):
            raise ValidationError(f"unknown builtin kernel {name!r}")
        motif = d["motif"]
        F = load_motif(base / motif) if isinstance(motif, str) else Motif(motif["v"], motif["edges"])
        if "graphon" in d:
            g = d["graphon"]
            from .graphon import load_graphon

            model = load_graphon(base / g) if isinstance(g, str) else StepGraphon.from_dict(g)
        else:
            model = float(d["p"])
        return subgraph_kernel(F, model, name.split("-")[1])
    try:
        xs = DiscreteSpace(d["x_atoms"], d["x_probs"])
        ys = DiscreteSpace(d.get("y_atoms", [0.0]), d.get("y_probs", [1.0]))
        return Kernel(int(d["k"]), xs, ys, d["table"])
    except KeyError as exc:
        raise ValidationError(f"kernel spec missing field {exc}") from None


# -- symmetry ------------------------------------------------------------------

def axis_permutation(perm: Sequence[int], k: int) -> list[int]:
    """Table axis order realizing the vertex relabeling ``perm``."""
    pairs = kernel_pairs(k)
    where = {e: t for t, e in enumerate(pairs)}
    axes = list(perm)
    for i, j in pairs:
        a, b = perm[i], perm[j]
        axes.append(k + where[(min(a, b), max(a, b))])
    return axes


def check_symmetry(f: Kernel) -> bool:
    for perm in itertools.permutations(range(f.k)):
        if not np.array_equal(np.transpose(f.table, axis_permutation(perm, f.k)), f.table):
            return False
    return True


# -- decomposition -------------------------------------------------------------

@dataclass(frozen=True)
class HoeffdingComponent:
    """Projection ``f_{A,B}`` onto vertex set ``A`` and pair set ``B`` (0-indexed).

    ``table`` is compact, with axes ``x_a`` for ``a`` in ``A`` then ``y_e`` for
    ``e`` in ``B``. ``support_graph`` is ``G_{A,B}`` on ``A ∪ endpoints(B)``,
    relabeled to ``0..v-1`` in increasing vertex order; ``aut`` counts its
    automorphisms that also preserve ``A``.
    """

    A: tuple[int, ...]
    B: tuple[Edge, ...]
    table: np.ndarray
    sigma: float
    support_graph: Motif | None
    v: int
    aut: int
    k: int

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.A).union(*self.B)))

    @property
    def axes(self) -> tuple[int, ...]:
        where = {e: t for t, e in enumerate(kernel_pairs(self.k))}
        return tuple(self.A) + tuple(self.k + where[e] for e in self.B)

    def broadcast(self) -> np.ndarray:
        """View with singleton axes for coordinates it does not depend on."""
        k, P = self.k, self.k * (self.k - 1) // 2
        shape = [1] * (k + P)
        for ax, size in zip(self.axes, self.table.shape):
            shape[ax] = size
        return self.table.reshape(shape)

    def __repr__(self) -> str:
        A = "{" + ",".join(str(a) for a in self.A) + "}"
        B = "{" + ",".join(f"{i}{j}" for i, j in self.B) + "}"
        return f"HoeffdingComponent(A={A}, B={B}, v={self.v}, sigma={self.sigma:.6g})"


class Decomposition:
    """All ``2^(k + k(k-1)/2)`` components of one kernel, with lookup by ``(A, B)``."""

    def __init__(self, kernel: Kernel, components: list[HoeffdingComponent]):
        self.kernel = kernel
        self.components = components
        self._index = {(c.A, c.B): c for c in components}

    def __iter__(self) -> Iterator[HoeffdingComponent]:
        return iter(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, key):
        if isinstance(key, int):
            return self.components[key]
        A, B = key
        return self._index[(tuple(sorted(A)), tuple(sorted(tuple(sorted(e)) for e in B)))]

    @property
    def tau(self) -> float:
        return self.kernel.norm(4.0)

    @property
    def zero_threshold(self) -> float:
        return ZERO_TOL * max(self.tau, 1.0)

    def nonzero(self) -> list[HoeffdingComponent]:
        thr = self.zero_threshold
        return [c for c in self.components if c.sigma > thr and c.v > 0]


def _support(A: Sequence[int], B: Sequence[Edge]) -> tuple[Motif | None, int, int]:
    verts = sorted(set(A).union(*B))
    if not verts:
        return None, 0, 1
    index = {u: t for t, u in enumerate(verts)}
    g = Motif(len(verts), [(index[i], index[j]) for i, j in B])
    return g, len(verts), automorphism_count(g, marked=[index[a] for a in A])


def hoeffding_decompose(f: Kernel, check: bool = True) -> Decomposition:
    """Exact Hoeffding decomposition of a symmetric kernel.

    Raises ValidationError for an asymmetric table and CapabilityError when
    the joint state space exceeds ``MAX_JOINT_STATES``.
    """
    if f.table.size > MAX_JOINT_STATES:
        raise CapabilityError(f"{f.table.size} joint states exceed the {MAX_JOINT_STATES} limit")
    if check and not check_symmetry(f):
        raise ValidationError("kernel is not symmetric under vertex relabeling")
    k, pairs = f.k, f.pairs
    m = f.ndim
    weights = f.axis_probs()
    out: list[tuple[tuple[int, ...], np.ndarray]] = []

    def expect(t: np.ndarray, a: int) -> np.ndarray:
        shp = [1] * m
        shp[a] = weights[a].size
        return np.sum(t * weights[a].reshape(shp), axis=a, keepdims=True)

    def recurse(t: np.ndarray, a: int, kept: tuple[int, ...]) -> None:
        if a == m:
            out.append((kept, t))
            return
        mean = expect(t, a)
        recurse(t - mean, a + 1, kept + (a,))
        recurse(mean, a + 1, kept)

    recurse(f.table, 0, ())
    joint = f.joint_probs()
    comps = []
    for kept, t in out:
        A = tuple(a for a in kept if a < k)
        B = tuple(pairs[a - k] for a in kept if a >= k)
        compact = t.reshape([t.shape[a] for a in kept])
        sigma = float(np.sqrt(np.sum(joint * np.broadcast_to(t, joint.shape) ** 2)))
        g, v, aut = _support(A, B)
        compact.setflags(write=False)
        comps.append(HoeffdingComponent(A, B, compact, sigma, g, v, aut, k))
    comps.sort(key=lambda c: (len(c.A) + len(c.B), c.A, c.B))
    return Decomposition(f, comps)


def canonical_pair(A: Sequence[int], B: Sequence[Edge], k: int) -> tuple:
    """Orbit label of ``(A, B)`` under relabelings of ``[k]``."""
    best = None
    for perm in itertools.permutations(range(k)):
        cand = (
            tuple(sorted(perm[a] for a in A)),
            tuple(sorted((min(perm[i], perm[j]), max(perm[i], perm[j])) for i, j in B)),
        )
        if best is None or cand < best:
            best = cand
    return best


def orbit_classes(components: Sequence[HoeffdingComponent]) -> dict[tuple, list[HoeffdingComponent]]:
    """Group components whose support graphs are isomorphic as vertex-marked graphs."""
    classes: dict[tuple, list[HoeffdingComponent]] = {}
    for c in components:
        classes.setdefault(canonical_pair(c.A, c.B, c.k), []).append(c)
    return classes


@dataclass(frozen=True)
class KernelSummary:
    d: int
    principal_graphs: tuple[tuple[tuple[int, ...], tuple[Edge, ...]], ...]
    sigma1: float
    sigma_min: float
    tau: float
    all_connected: bool
    all_strongly_connected: bool
    depends_on_x: bool

    def principal_components(self, decomp: Decomposition) -> list[HoeffdingComponent]:
        return [decomp[(A, B)] for A, B in self.principal_graphs]


def summarize(components: Decomposition, f: Kernel | None = None) -> KernelSummary:
    """Principal degree, principal support graphs, and the moment constants."""
    f = f or components.kernel
    nz = components.nonzero()
    if not nz:
        raise DegenerateKernelError("kernel is constant: every non-trivial projection vanishes")
    d = min(c.v for c in nz)
    principal = [c for c in nz if c.v == d]
    try:
        s1 = components[((0,), ())].sigma
    except KeyError:
        s1 = 0.0
    if s1 <= components.zero_threshold:
        s1 = 0.0
    return KernelSummary(
        d=d,
        principal_graphs=tuple((c.A, c.B) for c in principal),
        sigma1=s1,
        sigma_min=min(c.sigma for c in principal),
        tau=f.norm(4.0),
        # isolated A-vertices are genuine vertices of a support graph
        all_connected=all(is_connected(c.support_graph, ignore_isolated=False) for c in principal),
        all_strongly_connected=all(
            is_strongly_connected(c.support_graph, ignore_isolated=False) for c in principal
        ),
        depends_on_x=f.depends_on_x,
    )


def level_kernel(components: Decomposition, ell: int) -> Kernel:
    """The level-``ell`` part: sum of components with ``v_{A,B} = ell`` (``ell = 0`` is the mean)."""
    f = components.kernel
    if not 0 <= ell <= f.k:
        raise ValidationError(f"level must be in 0..{f.k}, got {ell}")
    total = np.zeros(f.shape)
    for c in components:
        if c.v == ell:
            total = total + c.broadcast()
    return Kernel(f.k, f.x_space, f.y_space, total)


def reconstruct(components: Decomposition) -> np.ndarray:
    total = np.zeros(components.kernel.shape)
    for c in components:
        total = total + c.broadcast()
    return total


# -- Erdos-Renyi closed forms ----------------------------------------------------------

def _check_p(p: float) -> None:
    if not 0.0 < float(p) < 1.0:
        raise ValidationError(f"p must lie in (0, 1), got {p}")


def er_closed_form_projections(F: Motif, p: float, mode: str = "inj") -> dict[tuple[Edge, ...], np.ndarray]:
    """Known low-order projections of ``phi_F`` under Erdos-Renyi(p).

    Tables are over the indicator alphabet ``(1, 0)`` of
    :meth:`DiscreteSpace.bernoulli`. ``inj`` gives the single-edge projection;
    ``ind`` also gives the 2-star ``{01, 02}`` and triangle ``{01, 02, 12}``
    projections when ``v(F) >= 3``.
    """
    _check_p(p)
    if mode not in ("inj", "ind"):
        raise ValidationError(f"mode must be 'inj' or 'ind', got {mode!r}")
    y = np.array([1.0, 0.0]) - p
    v = F.vertex_count
    st = motif_stats(F)
    e = st.edge_count
    aut = automorphism_count(F)
    B1 = ((0, 1),)
    B2 = ((0, 1), (0, 2))
    B3 = ((0, 1), (0, 2), (1, 2))
    if mode == "inj":
        coef = 2 * e * math.factorial(v - 2) / aut * p ** (e - 1)
        return {B1: coef * y}
    pairs_total = math.comb(v, 2)
    N = math.factorial(v) / aut * p**e * (1 - p) ** (pairs_total - e)
    ebar = e / pairs_total
    out = {B1: N / (p * (1 - p)) * (ebar - p) * y}
    if v >= 3:
        triples = math.comb(v, 3)
        sbar = st.two_star_count / 3 / triples
        tbar = st.triangle_count / triples
        c2 = N / (p * (1 - p)) ** 2 * (sbar - 2 * p * ebar + p**2)
        c3 = N / (p * (1 - p)) ** 3 * (tbar - 3 * p * sbar + 3 * p**2 * ebar - p**3)
        out[B2] = c2 * np.multiply.outer(y, y)
        out[B3] = c3 * np.multiply.outer(np.multiply.outer(y, y), y)
    return out


def exact_fraction(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10**9)
