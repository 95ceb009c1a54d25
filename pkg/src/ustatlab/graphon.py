"""Step graphons, the random graph G(n, kappa), and exact subgraph densities."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .errors import ParseError, ValidationError
from .graphs import Motif, automorphism_count


@dataclass(frozen=True)
class StepGraphon:
    """Symmetric piecewise-constant kappa on [0,1]^2 with ``b`` equal-mass blocks."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, ndmin=2)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValidationError(f"graphon values must be a square matrix, got shape {v.shape}")
        if not np.array_equal(v, v.T):
            raise ValidationError("graphon values must be symmetric")
        if np.any(v < 0) or np.any(v > 1):
            raise ValidationError("graphon values must lie in [0, 1]")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, p: float) -> "StepGraphon":
        return cls(np.array([[float(p)]]))

    @property
    def blocks(self) -> int:
        return self.values.shape[0]

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0, 0]))

    def refine(self, factor: int) -> "StepGraphon":
        """Same function with each block split into ``factor`` equal blocks."""
        return StepGraphon(np.kron(self.values, np.ones((factor, factor))))

    def __call__(self, x, y):
        """Evaluate at points of [0, 1]."""
        b = self.blocks
        i = np.minimum((np.asarray(x) * b).astype(int), b - 1)
        j = np.minimum((np.asarray(y) * b).astype(int), b - 1)
        return self.values[i, j]

    def to_dict(self) -> dict:
        if self.is_constant:
            return {"constant": float(self.values[0, 0])}
        return {"blocks": self.blocks, "values": self.values.ravel().tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StepGraphon":
        if "constant" in d:
            return cls.constant(d["constant"])
        b = int(d["blocks"])
        vals = np.asarray(d["values"], dtype=float)
        if vals.size != b * b:
            raise ValidationError(f"expected {b * b} graphon values, got {vals.size}")
        return cls(vals.reshape(b, b))


def load_graphon(path) -> StepGraphon:
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno, str(p)) from None
    return StepGraphon.from_dict(d)


@dataclass(frozen=True)
class GraphSample:
    n: int
    x_latent: np.ndarray
    adjacency: np.ndarray
    seed: int
    replicate: int = field(default=0)

    def __post_init__(self):
        for name in ("x_latent", "adjacency"):
            getattr(self, name).setflags(write=False)

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def to_edge_list(self) -> str:
        lines = [f"n {self.n} seed {self.seed}"]
        lines.append("x " + " ".join(str(int(v)) for v in self.x_latent))
        lines += [f"{i} {j}" for i, j in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edge_list(cls, text: str, source: str = "") -> "GraphSample":
        lines = [(k, ln) for k, ln in enumerate(text.splitlines(), start=1) if ln.strip()]
        if not lines:
            raise ParseError("empty graph file", 1, 1, source)
        k0, head = lines[0]
        tok = head.split()
        if len(tok) != 4 or tok[0] != "n" or tok[2] != "seed":
            raise ParseError("expected header 'n <n> seed <seed>'", k0, 1, source)
        try:
            n, seed = int(tok[1]), int(tok[3])
        except ValueError:
            raise ParseError("header values must be integers", k0, 1, source) from None
        x = np.zeros(n, dtype=np.intp)
        a = np.zeros((n, n), dtype=np.uint8)
        for k, ln in lines[1:]:
            tok = ln.split()
            try:
                if tok[0] == "x":
                    x = np.array([int(t) for t in tok[1:]], dtype=np.intp)
                    if x.size != n:
                        raise ParseError(f"expected {n} latent values", k, 1, source)
                    continue
                i, j = int(tok[0]), int(tok[1])
            except ValueError:
                raise ParseError("edge endpoints must be integers", k, 1, source) from None
            if len(tok) != 2 or i == j or not (0 <= i < n and 0 <= j < n):
                raise ParseError(f"bad edge line '{ln.strip()}'", k, 1, source)
            if a[i, j]:
                raise ParseError(f"duplicate edge ({i}, {j})", k, 1, source)
            a[i, j] = a[j, i] = 1
        return cls(n, x, a, seed)


def _pair_index(n: int):
    return np.triu_indices(n, 1)


def sample_condensed(kappa: StepGraphon, n: int, seed: int, replicates) -> tuple[np.ndarray, np.ndarray]:
    """Latent blocks ``(R, n)`` and condensed edge indicators ``(R, n(n-1)/2)``.

    Replicate ``r`` is drawn from its own stream keyed by ``(seed, n, r)``;
    pairs are in row-major upper-triangular order.
    """
    reps = list(replicates)
    P = n * (n - 1) // 2
    b = kappa.blocks
    thr = rng.thresholds(kappa.values)
    uniform_blocks = np.full(b, 1.0 / b)
    xs = np.zeros((len(reps), n), dtype=np.intp)
    edges = np.empty((len(reps), P), dtype=bool)
    if b > 1:
        iu, ju = _pair_index(n)
    for t, r in enumerate(reps):
        w = rng.words(rng.stream(seed, n, r), n + P)
        if b > 1:
            x = rng.categorical(w[:n], uniform_blocks)
            xs[t] = x
            np.less(w[n:], thr[x[iu], x[ju]], out=edges[t])
        else:
            np.less(w[n:], thr[0, 0], out=edges[t])
    return xs, edges


def condensed_to_adjacency(edges: np.ndarray, n: int, dtype=np.uint8) -> np.ndarray:
    """Condensed ``(R, P)`` indicators to a stack of symmetric ``(R, n, n)`` matrices."""
    from scipy.spatial.distance import squareform

    out = np.empty((edges.shape[0], n, n), dtype=dtype)
    for t in range(edges.shape[0]):
        out[t] = squareform(edges[t].astype(dtype), checks=False)
    return out


def sample(kappa: StepGraphon, n: int, seed: int, replicate: int = 0) -> GraphSample:
    """Draw one graph from G(n, kappa): iid uniform block labels, then independent edges."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    xs, edges = sample_condensed(kappa, n, seed, [replicate])
    adj = condensed_to_adjacency(edges, n)[0] if n > 1 else np.zeros((1, 1), np.uint8)
    return GraphSample(n, xs[0], adj, int(seed), replicate)


def _densities(F: Motif, kappa: StepGraphon, induced: bool) -> float:
    v = F.vertex_count
    b = kappa.blocks
    K = kappa.values
    es = F.edge_set
    pairs = list(itertools.combinations(range(v), 2))
    total = 0.0
    for assign in itertools.product(range(b), repeat=v):
        w = 1.0
        for i, j in pairs:
            kij = K[assign[i], assign[j]]
            if (i, j) in es:
                w *= kij
            elif induced:
                w *= 1.0 - kij
            if w == 0.0:
                break
        total += w
    return total / b**v


def density_inj(F: Motif, kappa: StepGraphon) -> float:
    """Homomorphism density: mean over block assignments of the product of kappa over edges."""
    return _densities(F, kappa, induced=False)


def density_ind(F: Motif, kappa: StepGraphon) -> float:
    """Induced density: also multiplies ``1 - kappa`` over the non-edges of K_v."""
    return _densities(F, kappa, induced=True)


def expected_count(F: Motif, kappa: StepGraphon, n: int, mode: str = "inj") -> float:
    k = F.vertex_count
    if n < k:
        raise ValidationError(f"n={n} smaller than motif size {k}")
    t = density_inj(F, kappa) if mode == "inj" else density_ind(F, kappa)
    return math.comb(n, k) * math.factorial(k) / automorphism_count(F) * t
