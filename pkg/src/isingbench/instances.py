"""Benchmark instance generation, exact ground states, and the text file format.

Square lattices are periodic L x L grids (N = L^2, degree 4) with planted
ground states; Viana-Bray instances are random c-regular graphs with Gaussian
couplings (c = N - 1 gives the Sherrington-Kirkpatrick model). Instances small
enough (N <= 24) can be solved exactly by Gray-code enumeration.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass

import numba
import numpy as np

from .model import IsingProblem, as_config, energy, validate

ORACLE_MAX_SPINS = 24
TRANSFER_MAX_L = 8
PAIRING_RETRIES = 1000
SQUARE_MODES = ("mattis", "frustrated-loops", "random-verified", "random-exact")


class OracleInfeasibleError(ValueError):
    """Exact enumeration requested for a problem that is too large."""


class GenerationError(RuntimeError):
    """A random construction did not succeed within its retry budget."""


class InstanceParseError(ValueError):
    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


@dataclass(frozen=True)
class SquareLatticeSpec:
    L: int
    seed: int = 0
    loops: int | None = None  # frustrated-loops only; default L*L // 2

    def __post_init__(self):
        if self.L < 3:
            raise ValueError(f"periodic square lattice needs L >= 3 for four distinct neighbours, got {self.L}")


@dataclass(frozen=True)
class VianaBraySpec:
    N: int
    c: int
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.c <= self.N - 1:
            raise ValueError(f"connectivity must satisfy 1 <= c <= N-1, got c={self.c}, N={self.N}")
        if (self.c * self.N) % 2:
            raise ValueError(f"c*N must be even for a c-regular graph, got c={self.c}, N={self.N}")


# ---------------------------------------------------------------- square lattices

def square_lattice_edges(L: int) -> np.ndarray:
    """Edge list of the periodic L x L lattice: (right, down) bonds of each site, i < j."""
    idx = np.arange(L * L).reshape(L, L)
    right = np.stack([idx.ravel(), np.roll(idx, -1, axis=1).ravel()], axis=1)
    down = np.stack([idx.ravel(), np.roll(idx, -1, axis=0).ravel()], axis=1)
    e = np.concatenate([right, down])
    return np.sort(e, axis=1)


def _plaquettes(L: int) -> np.ndarray:
    """Edge indices (into square_lattice_edges order) of each unit plaquette, row-major by corner."""
    n = L * L
    site = lambda r, c: (r % L) * L + (c % L)
    out = []
    for r in range(L):
        for c in range(L):
            top = site(r, c)                  # right bond of (r, c)
            right = n + site(r, c + 1)        # down bond of (r, c+1)
            bottom = site(r + 1, c)           # right bond of (r+1, c)
            left = n + site(r, c)             # down bond of (r, c)
            out.append((top, right, bottom, left))
    return np.array(out, dtype=np.int64)


def _finish(n, edges, weights, ground, planted, meta) -> IsingProblem:
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    meta = dict(meta)
    if planted is not None:
        meta["planted"] = config_to_str(planted)
    return IsingProblem(n=n, edges=edges[order], weights=weights[order], ground_energy=ground, metadata=meta)


def gen_planted_square(spec: SquareLatticeSpec, mode: str = "frustrated-loops") -> IsingProblem:
    """Square-lattice instance whose ground-state energy is known.

    ``mattis`` gauges a ferromagnet with |J| in {1, 2} onto a random planted
    state. ``frustrated-loops`` sums frustrated plaquette loops (three
    satisfied unit bonds and one unsatisfied) that are all minimised by the
    planted state, so the ground energy is -2 per loop plus the satisfied
    fill bonds on any edge no loop covers. ``random-verified`` draws
    couplings from {±1, ±2} and solves the instance by enumeration
    (N <= 24); ``random-exact`` does the same with a row transfer matrix,
    which reaches L <= 8.
    """
    if mode not in SQUARE_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {SQUARE_MODES}")
    L = spec.L
    n = L * L
    rng = np.random.default_rng(spec.seed)
    edges = square_lattice_edges(L)
    meta = {"generator": "square", "mode": mode, "L": str(L), "seed": str(spec.seed)}

    if mode in ("random-verified", "random-exact"):
        if mode == "random-verified" and n > ORACLE_MAX_SPINS:
            raise OracleInfeasibleError(f"random-verified needs N <= {ORACLE_MAX_SPINS}, got N={n}")
        if mode == "random-exact" and L > TRANSFER_MAX_L:
            raise OracleInfeasibleError(f"random-exact needs L <= {TRANSFER_MAX_L}, got L={L}")
        w = rng.choice(np.array([-2.0, -1.0, 1.0, 2.0]), size=len(edges))
        prob = _finish(n, edges, w, None, None, meta)
        if mode == "random-verified":
            e0, cfg = brute_force_ground_state(prob)
        else:
            e0, cfg = lattice_ground_state(prob, L)
        return _finish(n, prob.edges, prob.weights, e0, cfg, meta)

    planted = np.where(rng.random(n) < 0.5, 1, -1).astype(np.int8)
    gauge = planted[edges[:, 0]] * planted[edges[:, 1]]

    if mode == "mattis":
        mag = rng.integers(1, 3, size=len(edges)).astype(np.float64)
        return _finish(n, edges, mag * gauge, -float(mag.sum()), planted, meta)

    loops = n // 2 if spec.loops is None else spec.loops
    if loops < 0:
        raise ValueError("loop count must be non-negative")
    meta["loops"] = str(loops)
    plaq = _plaquettes(L)
    w = np.zeros(len(edges))

    def loop_couplings(p):
        c = np.ones(4)
        c[rng.integers(4)] = -1.0
        return plaq[p], c

    placed = 0
    if L % 2 == 0 and loops >= n // 2:
        parity = int(rng.integers(2))
        colour = [p for p in range(n) if (p // L + p % L) % 2 == parity]
        for p in colour:
            e, c = loop_couplings(p)
            w[e] += c
        placed = len(colour)
    attempts = 0
    while placed < loops:
        attempts += 1
        if attempts > PAIRING_RETRIES * max(loops, 1):
            raise GenerationError(f"could not place {loops} loops on L={L} with |J| in {{1, 2}}")
        e, c = loop_couplings(int(rng.integers(n)))
        trial = w[e] + c
        if np.any(trial == 0) or np.any(np.abs(trial) > 2):
            continue
        w[e] = trial
        placed += 1
    ground = -2.0 * loops
    free = w == 0
    if free.any():
        fill = rng.integers(1, 3, size=int(free.sum())).astype(np.float64)
        w[free] = fill
        ground -= float(fill.sum())
    return _finish(n, edges, w * gauge, ground, planted, meta)


# ---------------------------------------------------------------- Viana-Bray

def _random_regular_edges(n: int, d: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Stub pairing with rejection of self-loops and multi-edges.

    Rejected stubs are re-paired among themselves; the whole pairing restarts
    only when the leftovers cannot form any valid edge.
    """
    def attempt():
        edges: set[tuple[int, int]] = set()
        stubs = np.repeat(np.arange(n), d)
        while len(stubs):
            stubs = rng.permutation(stubs)
            left = []
            for a, b in zip(stubs[0::2].tolist(), stubs[1::2].tolist()):
                a, b = min(a, b), max(a, b)
                if a != b and (a, b) not in edges:
                    edges.add((a, b))
                else:
                    left += [a, b]
            if left:
                nodes = sorted(set(left))
                if not any(u != v and (u, v) not in edges for i, u in enumerate(nodes) for v in nodes[i + 1:]):
                    return None
            stubs = np.array(left, dtype=np.int64)
        return edges

    for _ in range(PAIRING_RETRIES):
        edges = attempt()
        if edges is not None:
            return edges
    raise GenerationError(f"random {d}-regular pairing on {n} vertices failed {PAIRING_RETRIES} times")


def gen_viana_bray(spec: VianaBraySpec, verify: bool = False) -> IsingProblem:
    """Random c-regular graph with i.i.d. standard-normal couplings."""
    n, c = spec.N, spec.c
    rng = np.random.default_rng(spec.seed)
    complete = {(i, j) for i in range(n) for j in range(i + 1, n)}
    if c == n - 1:
        edge_set = complete
    elif 2 * c > n - 1:
        # dense side: complement of a sparse regular graph pairs far more reliably
        edge_set = complete - _random_regular_edges(n, n - 1 - c, rng)
    else:
        edge_set = _random_regular_edges(n, c, rng)
    edges = np.array(sorted(edge_set), dtype=np.int64).reshape(-1, 2)
    w = rng.standard_normal(len(edges))
    meta = {"generator": "viana-bray", "N": str(n), "c": str(c), "seed": str(spec.seed)}
    prob = IsingProblem(n=n, edges=edges, weights=w, metadata=meta)
    if verify:
        e0, cfg = brute_force_ground_state(prob)
        prob = _finish(n, edges, w, e0, cfg, meta)
    return prob


# ---------------------------------------------------------------- exact oracle

@numba.njit(cache=True)
def _gray_search(indptr, indices, data, n, tol):
    s = np.ones(n)
    h = np.zeros(n)
    for k in range(n):
        for p in range(indptr[k], indptr[k + 1]):
            h[k] += data[p]
    e = 0.0
    for k in range(n):
        e -= 0.5 * h[k]
    best = e
    key = 0
    best_key = 0
    # spin 0 stays +1: every optimum's global flip is then never the lex-first one
    for i in range(1, 1 << (n - 1)):
        k = 1
        v = i
        while v & 1 == 0:
            v >>= 1
            k += 1
        e += 2.0 * s[k] * h[k]
        old = s[k]
        s[k] = -old
        for p in range(indptr[k], indptr[k + 1]):
            h[indices[p]] -= 2.0 * data[p] * old
        key ^= 1 << (n - 1 - k)
        if e < best - tol:
            best = e
            best_key = key
        elif e <= best + tol and key < best_key:
            best_key = key
    return best, best_key


def brute_force_ground_state(problem: IsingProblem) -> tuple[float, np.ndarray]:
    """Exact minimum energy and the lexicographically first optimal configuration.

    Lexicographic order treats +1 as preceding -1, comparing spin 0 first.
    """
    n = problem.n
    if n > ORACLE_MAX_SPINS:
        raise OracleInfeasibleError(f"exact enumeration limited to N <= {ORACLE_MAX_SPINS}, got N={n}")
    if n == 1:
        cfg = np.ones(1, dtype=np.int8)
        return energy(problem, cfg), cfg
    m = problem.matrix
    _, key = _gray_search(m.indptr.astype(np.int64), m.indices.astype(np.int64),
                          m.data.astype(np.float64), n, problem.energy_tol)
    bits = (key >> (n - 1 - np.arange(n))) & 1
    cfg = np.where(bits == 1, -1, 1).astype(np.int8)
    return energy(problem, cfg), cfg


@numba.njit(cache=True)
def _row_transfer(e_row, e_int):
    """Min-plus product around the ring of rows; returns (energy, row states)."""
    L, M = e_row.shape
    best = np.inf
    best_rows = np.zeros(L, dtype=np.int64)
    arg = np.zeros((L, M), dtype=np.int64)
    d = np.empty(M)
    nxt = np.empty(M)
    for s0 in range(M):
        for s in range(M):
            d[s] = e_row[0, s0] + e_int[0, s0, s] + e_row[1, s]
        for r in range(1, L - 1):
            for t in range(M):
                m = np.inf
                a = 0
                for s in range(M):
                    v = d[s] + e_int[r, s, t]
                    if v < m:
                        m = v
                        a = s
                nxt[t] = m + e_row[r + 1, t]
                arg[r + 1, t] = a
            d[:] = nxt
        for s in range(M):
            v = d[s] + e_int[L - 1, s, s0]
            if v < best:
                best = v
                best_rows[0] = s0
                best_rows[L - 1] = s
                for r in range(L - 1, 1, -1):
                    best_rows[r - 1] = arg[r, best_rows[r]]
    return best, best_rows


def lattice_ground_state(problem: IsingProblem, L: int | None = None) -> tuple[float, np.ndarray]:
    """Exact ground state of an L x L lattice whose couplings only join equal or adjacent rows.

    Site (r, c) has index r*L + c. Dynamic programming over row states costs
    O(L 8^L), so L is limited to TRANSFER_MAX_L.
    """
    if L is None:
        L = int(round(np.sqrt(problem.n)))
    if L * L != problem.n or L < 3:
        raise ValueError(f"expected an L x L lattice with L >= 3, got N={problem.n}")
    if L > TRANSFER_MAX_L:
        raise OracleInfeasibleError(f"row transfer limited to L <= {TRANSFER_MAX_L}, got L={L}")
    rows = problem.edges // L
    gap = (rows[:, 1] - rows[:, 0]) % L
    if np.any((gap != 0) & (gap != 1) & (gap != L - 1)):
        raise ValueError("couplings must join sites in the same or neighbouring rows")
    J = problem.matrix.toarray()
    M = 1 << L
    S = np.where((np.arange(M)[:, None] >> np.arange(L)) & 1, -1.0, 1.0)
    e_row = np.empty((L, M))
    e_int = np.empty((L, M, M))
    for r in range(L):
        blk = J[r * L:(r + 1) * L, r * L:(r + 1) * L]
        e_row[r] = -0.5 * np.einsum("si,ij,sj->s", S, blk, S)
        q = (r + 1) % L
        e_int[r] = -(S @ J[r * L:(r + 1) * L, q * L:(q + 1) * L] @ S.T)
    _, states = _row_transfer(e_row, e_int)
    cfg = S[states].ravel().astype(np.int8)
    return energy(problem, cfg), cfg


# ---------------------------------------------------------------- planted configs

def config_to_str(config) -> str:
    return "".join("+" if s > 0 else "-" for s in np.asarray(config))


def config_from_str(text: str) -> np.ndarray:
    if not text or set(text) - {"+", "-"}:
        raise ValueError(f"spin string must consist of '+' and '-', got {text!r}")
    return np.array([1 if ch == "+" else -1 for ch in text], dtype=np.int8)


def planted_config(problem: IsingProblem) -> np.ndarray | None:
    """The recorded optimal configuration, when the generator or oracle stored one."""
    text = problem.metadata.get("planted")
    return None if text is None else as_config(config_from_str(text), problem.n)


# ---------------------------------------------------------------- file format

def write_instance(problem: IsingProblem, path) -> None:
    """Write the text instance format (couplings with 17 significant digits)."""
    lines = []
    if problem.ground_energy is not None:
        lines.append(f"# ground_energy: {problem.ground_energy:.17g}")
    for k, v in problem.metadata.items():
        if "\n" in str(v) or "=" in str(k):
            raise ValueError(f"metadata entry {k!r} cannot be written")
        lines.append(f"# meta: {k}={v}")
    lines.append(f"{problem.n} {problem.n_couplings}")
    for (i, j), w in zip(problem.edges.tolist(), problem.weights.tolist()):
        lines.append(f"{i} {j} {w:.17g}")
    text = "\n".join(lines) + "\n"
    if path == "-" or path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def parse_instance(text: str, path="<string>") -> IsingProblem:
    ground = None
    meta: dict[str, str] = {}
    header = None
    edges: list[tuple[int, int]] = []
    weights: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("ground_energy:"):
                try:
                    ground = float(body.split(":", 1)[1])
                except ValueError:
                    raise InstanceParseError(path, lineno, f"bad ground_energy value {body!r}") from None
            elif body.startswith("meta:"):
                kv = body.split(":", 1)[1].strip()
                if "=" not in kv:
                    raise InstanceParseError(path, lineno, f"meta directive needs key=value, got {kv!r}")
                k, v = kv.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        parts = line.split()
        if header is None:
            if len(parts) != 2:
                raise InstanceParseError(path, lineno, f"header must be '<N> <M>', got {line!r}")
            try:
                header = (int(parts[0]), int(parts[1]))
            except ValueError:
                raise InstanceParseError(path, lineno, f"header must be two integers, got {line!r}") from None
            if header[0] < 1 or header[1] < 0:
                raise InstanceParseError(path, lineno, f"invalid header sizes {header}")
            continue
        if len(parts) != 3:
            raise InstanceParseError(path, lineno, f"coupling line must be '<i> <j> <J>', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise InstanceParseError(path, lineno, f"non-integer index in {line!r}") from None
        try:
            w = float(parts[2])
        except ValueError:
            raise InstanceParseError(path, lineno, f"non-numeric coupling {parts[2]!r}") from None
        n = header[0]
        if not (0 <= i < n and 0 <= j < n):
            raise InstanceParseError(path, lineno, f"index out of range for N={n}: ({i}, {j})")
        if i >= j:
            raise InstanceParseError(path, lineno, f"indices must satisfy i < j, got ({i}, {j})")
        if not np.isfinite(w):
            raise InstanceParseError(path, lineno, f"non-finite coupling {parts[2]!r}")
        edges.append((i, j))
        weights.append(w)
    if header is None:
        raise InstanceParseError(path, 0, "missing '<N> <M>' header")
    if len(edges) != header[1]:
        raise InstanceParseError(path, 0, f"header declares {header[1]} couplings, found {len(edges)}")
    prob = IsingProblem(n=header[0], edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
                        weights=np.array(weights), ground_energy=ground, metadata=meta)
    problems = validate(prob)
    if problems:
        raise InstanceParseError(path, 0, "; ".join(problems))
    return prob


def read_instance(path) -> IsingProblem:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_instance(text, path)
