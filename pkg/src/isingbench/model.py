"""Ising problem representation, energies and spin readout.

Energies follow H = -1/2 sum_{l,m} J_lm s_l s_m with no external field,
i.e. each undirected coupling (i, j) contributes -J_ij s_i s_j once.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

# Absolute tolerance for comparing energies of real-valued (e.g. Gaussian) instances.
REAL_ENERGY_TOL = 1e-9

READOUT_KINDS = ("sign", "phase", "real-part")


class DimensionError(ValueError):
    """A spin vector or state does not match the problem size."""


@dataclass(frozen=True, eq=False)
class IsingProblem:
    """Sparse symmetric Ising instance.

    ``edges`` holds (i, j) index pairs with i < j and ``weights`` the matching
    couplings J_ij. The problem is treated as immutable; derived views (CSR
    matrix, adjacency rows) are built lazily and cached.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    ground_energy: float | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_couplings(
        cls,
        n: int,
        couplings: Iterable[tuple[int, int, float]],
        ground_energy: float | None = None,
        metadata: Mapping[str, str] | None = None,
    ) -> "IsingProblem":
        """Build a problem from (i, j, J_ij) triples; pairs are reordered so i < j."""
        triples = list(couplings)
        edges = np.array([(min(i, j), max(i, j)) for i, j, _ in triples], dtype=np.int64).reshape(-1, 2)
        weights = np.array([w for _, _, w in triples], dtype=np.float64)
        return cls(
            n=int(n),
            edges=edges,
            weights=weights,
            ground_energy=None if ground_energy is None else float(ground_energy),
            metadata=dict(metadata or {}),
        )

    def __post_init__(self):
        edges = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.array(self.weights, dtype=np.float64).reshape(-1)
        edges.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)

    def __eq__(self, other):
        if not isinstance(other, IsingProblem):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.weights, other.weights)
            and self.ground_energy == other.ground_energy
            and self.metadata == other.metadata
        )

    __hash__ = None

    @property
    def n_couplings(self) -> int:
        return len(self.weights)

    @property
    def name(self) -> str:
        """The ``name`` metadata tag, else a digest of the couplings."""
        return self.metadata.get("name") or self.digest

    @cached_property
    def digest(self) -> str:
        h = hashlib.blake2b(digest_size=8)
        h.update(np.int64(self.n).tobytes())
        h.update(self.edges.tobytes())
        h.update(self.weights.tobytes())
        return h.hexdigest()

    @cached_property
    def integer_couplings(self) -> bool:
        return bool(np.all(self.weights == np.round(self.weights)))

    @property
    def energy_tol(self) -> float:
        return 0.0 if self.integer_couplings else REAL_ENERGY_TOL

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Symmetric CSR coupling matrix (duplicates summed)."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.concatenate([self.weights, self.weights])
        m = sp.csr_matrix((vals, (rows, cols)), shape=(self.n, self.n))
        m.sum_duplicates()
        m.sort_indices()
        return m

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)

    @cached_property
    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return 2.0 * self.n_couplings / (self.n * (self.n - 1))

    @cached_property
    def max_abs_row_sum(self) -> float:
        """max_l sum_m |J_lm|, the scale used by the gain-dissipative parameters."""
        if self.n_couplings == 0:
            return 0.0
        return float(np.max(np.asarray(abs(self.matrix).sum(axis=1)).ravel()))

    def field(self, x: np.ndarray) -> np.ndarray:
        """Local fields sum_m J_lm x_m for a state of shape (n,) or (R, n).

        Always evaluated through CSR rows: the result for a row never depends
        on how many other rows are in the batch (dense BLAS does not give that).
        """
        x = np.asarray(x)
        if x.shape[-1] != self.n:
            raise DimensionError(f"state has {x.shape[-1]} components, problem has {self.n} spins")
        if x.ndim == 1:
            return self.matrix @ x
        return (self.matrix @ x.T).T

    def energies(self, spins: np.ndarray) -> np.ndarray:
        """Fast batched energies for ±1 configurations of shape (R, n)."""
        s = np.asarray(spins, dtype=np.float64)
        return -0.5 * np.sum(s * self.field(s), axis=-1)


def as_config(spins, n: int | None = None) -> np.ndarray:
    """Coerce to an int8 ±1 vector, checking values and (optionally) length."""
    s = np.asarray(spins)
    if s.ndim != 1:
        raise DimensionError("a spin configuration is one-dimensional")
    if n is not None and len(s) != n:
        raise DimensionError(f"configuration has {len(s)} spins, problem has {n}")
    if not np.all((s == 1) | (s == -1)):
        raise ValueError("spins must be exactly +1 or -1")
    return s.astype(np.int8)


def energy(problem: IsingProblem, config) -> float:
    """Exact energy of one configuration (correctly rounded sum over couplings)."""
    s = np.asarray(config)
    if s.shape != (problem.n,):
        raise DimensionError(f"configuration shape {s.shape} does not match n={problem.n}")
    if problem.n_couplings == 0:
        return 0.0
    s = s.astype(np.float64)
    terms = problem.weights * s[problem.edges[:, 0]] * s[problem.edges[:, 1]]
    return -math.fsum(terms.tolist())


def readout(state, kind: str = "sign") -> np.ndarray:
    """Binarize an analog state to ±1 spins; zero maps to +1.

    ``sign`` reads real amplitudes, ``phase`` reads oscillator phases through
    cos(x), ``real-part`` reads complex amplitudes through Re(psi). Works
    along the last axis, so batches of shape (R, n) are accepted.
    """
    x = np.asarray(state)
    if kind == "sign":
        v = x.real if np.iscomplexobj(x) else x
    elif kind == "phase":
        v = np.cos(x)
    elif kind == "real-part":
        v = np.real(x)
    else:
        raise ValueError(f"unknown readout kind {kind!r}; expected one of {READOUT_KINDS}")
    return np.where(v >= 0, 1, -1).astype(np.int8)


def validate(problem: IsingProblem) -> list[str]:
    """List invariant violations; an empty list means the problem is well formed."""
    out: list[str] = []
    if problem.n < 1:
        out.append(f"spin count must be positive, got {problem.n}")
    e = problem.edges
    if e.ndim != 2 or (len(e) and e.shape[1] != 2):
        return out + ["edges must have shape (M, 2)"]
    if len(e) != len(problem.weights):
        out.append(f"{len(e)} edges but {len(problem.weights)} weights")
    seen: set[tuple[int, int]] = set()
    for k, (i, j) in enumerate(e.tolist()):
        if i == j:
            out.append(f"coupling {k}: self-coupling on spin {i}")
        if i < 0 or j < 0 or i >= problem.n or j >= problem.n:
            out.append(f"coupling {k}: index out of range ({i}, {j}) for n={problem.n}")
        if i > j:
            out.append(f"coupling {k}: pair ({i}, {j}) not ordered i < j")
        key = (min(i, j), max(i, j))
        if key in seen:
            out.append(f"coupling {k}: duplicate pair {key}")
        seen.add(key)
    if not np.all(np.isfinite(problem.weights)):
        out.append("non-finite coupling value")
    return out
