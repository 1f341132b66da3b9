"""Glauber dynamics for the hardcore model.

Randomness comes from numpy's counter-based Philox generator. A chain with
user seed ``s`` and index ``i`` is keyed by ``SeedSequence(s, spawn_key=(i,))``.
Each step consumes two uniform doubles in order: the first picks the vertex
``floor(u * n)``, the second is the occupation coin.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .exact import gibbs_distribution, independent_set_masks
from .graph import Configuration, Graph

MAX_STATES = 20_000
MAX_DENSE_MIXING_STATES = 4_096
MIXING_T_MAX = 10**7
TV_THRESHOLD = 0.25
MONOTONE_TOL = 1e-12
BLOCK = 4096


class NotIndependentError(ValueError):
    pass


class StateSpaceTooLarge(ValueError):
    pass


class MixingNotReached(RuntimeError):
    pass


def parse_seed(text: str | int) -> int:
    """Accept a decimal or 0x-hex 64-bit seed."""
    value = text if isinstance(text, int) else int(str(text).strip(), 0)
    if not 0 <= value < 2**64:
        raise ValueError(f"seed {text!r} is not an unsigned 64-bit integer")
    return value


def chain_rng(seed: int, chain_index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(parse_seed(seed), spawn_key=(chain_index,))
    return np.random.Generator(np.random.Philox(ss))


def _check_state(graph: Graph, sigma: Configuration) -> None:
    if sigma.n != graph.n:
        raise ValueError("configuration size does not match the graph")
    if not sigma.is_independent(graph):
        raise NotIndependentError("configuration is not an independent set")


# action codes for the trajectory dump
STAY, OCCUPY, VACATE, BLOCKED = "stay", "occupy", "vacate", "blocked"


def _update(nmask: list[int], bits: int, v: int, coin: float, p_occ: float) -> tuple[int, str]:
    was = bits >> v & 1
    rest = bits & ~(1 << v)
    if rest & nmask[v]:
        return rest, BLOCKED
    if coin < p_occ:
        return rest | (1 << v), STAY if was else OCCUPY
    return rest, VACATE if was else STAY


def glauber_step(graph: Graph, lam: float, sigma: Configuration,
                 rng: np.random.Generator) -> Configuration:
    """One heat-bath update at a uniformly random vertex."""
    _check_state(graph, sigma)
    if graph.n == 0:
        return sigma
    v = min(int(rng.random() * graph.n), graph.n - 1)
    coin = rng.random()
    bits, _ = _update(graph.neighbor_masks(), sigma.bits, v, coin, lam / (1.0 + lam))
    return Configuration(graph.n, bits)


@dataclass
class ChainState:
    config: Configuration
    step: int
    occupation_counts: np.ndarray | None = None
    trajectory: list[tuple[int, int, str, int]] | None = field(default=None, repr=False)

    def trajectory_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["step", "vertex_picked", "action", "popcount"])
        writer.writerows(self.trajectory or [])
        return buf.getvalue()


def run_chain(graph: Graph, lam: float, start: Configuration, steps: int, seed: int | str,
              chain_index: int = 0, record: bool = False,
              count_occupation: bool = False) -> ChainState:
    """Run ``steps`` Glauber updates from ``start``; reproducible given the seed.

    ``count_occupation`` accumulates, for each vertex, the number of
    post-step states in which it is occupied.
    """
    _check_state(graph, start)
    if steps < 0:
        raise ValueError("steps must be non-negative")
    rng = chain_rng(parse_seed(seed), chain_index)
    n = graph.n
    nmask = graph.neighbor_masks()
    p_occ = lam / (1.0 + lam)
    bits = start.bits
    traj: list[tuple[int, int, str, int]] | None = [] if record else None
    counts = np.zeros(n, dtype=np.int64) if count_occupation else None
    occupied_time = [0] * n
    # since[v]: first post-step state of v's current occupied stretch
    since = [1] * n
    done = 0
    while done < steps and n > 0:
        m = min(BLOCK, steps - done)
        draws = rng.random(2 * m)
        verts = np.minimum((draws[0::2] * n).astype(np.int64), n - 1).tolist()
        coins = draws[1::2].tolist()
        for k in range(m):
            v = verts[k]
            before = bits
            bits, action = _update(nmask, bits, v, coins[k], p_occ)
            t = done + k + 1
            if before != bits:
                if bits >> v & 1:
                    since[v] = t
                else:
                    occupied_time[v] += t - since[v]
            if traj is not None:
                traj.append((t, v, action, bin(bits).count("1")))
        done += m
    if counts is not None:
        for v in range(n):
            counts[v] = occupied_time[v] + (steps + 1 - since[v] if bits >> v & 1 else 0)
    return ChainState(Configuration(n, bits), steps, counts, traj)


def empirical_occupancy(graph: Graph, lam: float, start: Configuration, steps: int,
                        seed: int | str, chain_index: int = 0) -> np.ndarray:
    state = run_chain(graph, lam, start, steps, seed, chain_index, count_occupation=True)
    return state.occupation_counts / steps


@dataclass(frozen=True)
class TransitionMatrix:
    states: tuple[int, ...]          # independent sets as bitmasks, enumeration order
    P: sparse.csr_matrix
    stationary: np.ndarray           # Gibbs probabilities in the same order

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, config: Configuration | int) -> int:
        bits = config.bits if isinstance(config, Configuration) else config
        return self.states.index(bits)

    def dense(self) -> np.ndarray:
        return self.P.toarray()


def transition_matrix(graph: Graph, lam: float) -> TransitionMatrix:
    """Exact Glauber transition matrix over all independent sets."""
    masks = independent_set_masks(graph)
    if len(masks) > MAX_STATES:
        raise StateSpaceTooLarge(f"{len(masks)} independent sets exceed the limit {MAX_STATES}")
    _, mu = gibbs_distribution(graph, lam)
    index = {m: i for i, m in enumerate(masks)}
    n = graph.n
    nmask = graph.neighbor_masks()
    p_occ = lam / (1.0 + lam)
    p_vac = 1.0 / (1.0 + lam)
    rows, cols, vals = [], [], []
    for i, bits in enumerate(masks):
        stay = 0.0
        for v in range(n):
            rest = bits & ~(1 << v)
            if rest & nmask[v]:
                stay += 1.0 / n
                continue
            for target, prob in ((rest | (1 << v), p_occ), (rest, p_vac)):
                if target == bits:
                    stay += prob / n
                else:
                    rows.append(i)
                    cols.append(index[target])
                    vals.append(prob / n)
        if n == 0:
            stay = 1.0
        rows.append(i)
        cols.append(i)
        vals.append(stay)
    size = len(masks)
    P = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    P.sum_duplicates()
    return TransitionMatrix(tuple(masks), P, mu)


def detailed_balance_residual(tm: TransitionMatrix) -> float:
    flow = sparse.diags(tm.stationary) @ tm.P
    diff = (flow - flow.T).tocoo()
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0


def stationarity_residual(tm: TransitionMatrix) -> float:
    return float(np.abs(tm.P.T @ tm.stationary - tm.stationary).max())


def row_sum_residual(tm: TransitionMatrix) -> float:
    return float(np.abs(np.asarray(tm.P.sum(axis=1)).ravel() - 1.0).max())


@dataclass(frozen=True)
class MixingResult:
    t_mix: int
    tv_curve: tuple[float, ...]     # worst-start TV distance at t = 0, 1, ..., t_mix
    monotone: bool


def tv_distances(tm: TransitionMatrix, t: int) -> np.ndarray:
    """TV distance to stationarity after ``t`` steps from every start."""
    dist = np.eye(tm.size)
    PT = tm.P.T.tocsr()
    for _ in range(t):
        dist = (PT @ dist.T).T
    return 0.5 * np.abs(dist - tm.stationary[None, :]).sum(axis=1)


def exact_mixing_time(tm: TransitionMatrix, threshold: float = TV_THRESHOLD,
                      t_max: int = MIXING_T_MAX) -> MixingResult:
    """Smallest t with worst-start TV distance at most ``threshold``.

    Each start's distance is non-increasing in t, so the worst start's hitting
    time equals the first t at which the maximum over starts drops below the
    threshold. The per-start monotonicity is checked along the way.
    """
    if tm.size > MAX_DENSE_MIXING_STATES:
        raise StateSpaceTooLarge(
            f"{tm.size} states exceed the dense mixing limit {MAX_DENSE_MIXING_STATES}; "
            "use the simulated proxy instead")
    dist = np.eye(tm.size)
    PT = tm.P.T.tocsr()
    mu = tm.stationary[None, :]
    prev = 0.5 * np.abs(dist - mu).sum(axis=1)
    curve = [float(prev.max())]
    monotone = True
    t = 0
    while curve[-1] > threshold:
        if t >= t_max:
            raise MixingNotReached(f"TV still {curve[-1]:.4g} after {t_max} steps")
        dist = (PT @ dist.T).T
        t += 1
        tv = 0.5 * np.abs(dist - mu).sum(axis=1)
        if np.any(tv > prev + MONOTONE_TOL):
            monotone = False
        prev = tv
        curve.append(float(tv.max()))
    return MixingResult(t, tuple(curve), monotone)


@dataclass(frozen=True)
class SpectralQuantities:
    top_eigenvalue: float
    second_eigenvalue_modulus: float
    relaxation_time: float


def spectral_quantities(tm: TransitionMatrix) -> SpectralQuantities:
    """Eigenvalue diagnostics via the symmetrization ``D^1/2 P D^-1/2``."""
    if tm.size > MAX_DENSE_MIXING_STATES:
        raise StateSpaceTooLarge(f"{tm.size} states exceed the dense eigensolver limit")
    root = np.sqrt(tm.stationary)
    sym = (tm.dense() * root[:, None]) / root[None, :]
    sym = 0.5 * (sym + sym.T)
    eig = np.linalg.eigvalsh(sym)
    order = np.argsort(-np.abs(eig))
    top = float(eig[order[0]])
    second = float(np.abs(eig[order[1]])) if tm.size > 1 else 0.0
    relax = math.inf if second >= 1.0 else 1.0 / (1.0 - second)
    return SpectralQuantities(top, second, relax)


@dataclass(frozen=True)
class ProxyCurve:
    """Heuristic distance proxy: largest gap in per-vertex occupation frequency
    between chains from different starts, driven by common random numbers.
    Not an estimate of, or bound on, the total-variation distance."""

    values: tuple[float, ...]
    half_widths: tuple[float, ...]
    reps: int
    label: str = "heuristic occupancy-discrepancy proxy (not a TV bound)"


def _occupancy_gap(occ: np.ndarray) -> tuple[float, int, int, int]:
    # occ: (starts, n) occupation frequencies
    gaps = occ.max(axis=0) - occ.min(axis=0)
    v = int(np.argmax(gaps))
    return float(gaps[v]), v, int(np.argmax(occ[:, v])), int(np.argmin(occ[:, v]))


def empirical_tv_curve(graph: Graph, lam: float, starts: list[Configuration], reps: int,
                       horizon: int, seed: int | str) -> ProxyCurve:
    """Per-step occupancy-discrepancy proxy across coupled replicas.

    Replica r of every start sees the same vertex choices and coins, so
    identical starts give identical trajectories. Half-widths are 1.96 times
    the standard error of the difference of the two extreme frequencies.
    """
    for s in starts:
        _check_state(graph, s)
    if reps < 1 or horizon < 0:
        raise ValueError("need reps >= 1 and horizon >= 0")
    n = graph.n
    rng = chain_rng(parse_seed(seed), 0)
    adj = np.zeros((max(n, 1), max(n, 1)), dtype=bool)
    for u, v in graph.edges():
        adj[u, v] = adj[v, u] = True
    state = np.array([[[bool(s.bits >> v & 1) for v in range(n)]] * reps for s in starts],
                     dtype=bool).reshape(len(starts), reps, n)
    p_occ = lam / (1.0 + lam)
    values, widths = [], []

    def record():
        occ = state.mean(axis=1)
        gap, v, hi, lo = _occupancy_gap(occ) if n else (0.0, 0, 0, 0)
        values.append(gap)
        if n == 0:
            widths.append(0.0)
            return
        p1, p2 = occ[hi, v], occ[lo, v]
        widths.append(1.96 * math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / reps))

    record()
    rows = np.arange(reps)
    for _ in range(horizon):
        if n == 0:
            record()
            continue
        draws = rng.random(2 * reps)
        verts = np.minimum((draws[0::2] * n).astype(np.int64), n - 1)
        coins = draws[1::2]
        blocked = (state & adj[verts][None, :, :]).any(axis=2)
        new = (~blocked) & (coins < p_occ)[None, :]
        state[:, rows, verts] = new
        record()
    return ProxyCurve(tuple(values), tuple(widths), reps)


def exact_occupancy_proxy(tm: TransitionMatrix, n: int, starts: list[Configuration],
                          horizon: int) -> list[float]:
    """Exact counterpart of ``empirical_tv_curve`` computed from matrix powers."""
    idx = [tm.index(s) for s in starts]
    occ_bits = np.array([[m >> v & 1 for v in range(n)] for m in tm.states], dtype=float)
    dist = np.zeros((len(idx), tm.size))
    dist[np.arange(len(idx)), idx] = 1.0
    PT = tm.P.T.tocsr()
    out = []
    for t in range(horizon + 1):
        occ = dist @ occ_bits
        out.append(float((occ.max(axis=0) - occ.min(axis=0)).max()) if n else 0.0)
        dist = (PT @ dist.T).T
    return out
