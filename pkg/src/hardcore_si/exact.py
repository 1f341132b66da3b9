"""Brute-force ground truth for the hardcore model on small graphs.

Everything here works by listing the independent sets of the graph, so the
cost is exponential in ``n``; sizes are guarded.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .graph import (
    EMPTY_PINNING,
    Configuration,
    Graph,
    Pinning,
    connected_vertex_subsets,
    free_vertices,
)

MAX_ENUMERATION_N = 30
MAX_PINNING_SCAN_N = 16
EXACT_VALUE_MAX_N = 40
EIGEN_IMAG_TOL = 1e-9
TIE_TOL = 1e-12  # a later pinning must beat the incumbent by this much


class SizeLimitError(ValueError):
    pass


class EigenError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PartitionValue:
    log_value: float
    exact_value: float | None = None


@dataclass(frozen=True)
class InfluenceMatrix:
    free: tuple[int, ...]
    entries: np.ndarray

    def row_sum(self, vertex: int) -> float:
        i = self.free.index(vertex)
        return float(np.abs(self.entries[i]).sum())


@dataclass(frozen=True)
class SIReport:
    inf_norm: float
    max_eigenvalue: float


def _check_lambda(lam: float) -> None:
    if not lam > 0 or not math.isfinite(lam):
        raise ValueError(f"fugacity must be a positive finite number, got {lam}")


def independent_set_masks(graph: Graph, limit: int = MAX_ENUMERATION_N) -> list[int]:
    """Independent sets as bitmasks in backtracking order.

    Vertices are decided in ascending order, "out" before "in", so the empty
    set comes first.
    """
    if graph.n > limit:
        raise SizeLimitError(f"n={graph.n} exceeds the enumeration limit {limit}")
    nmask = graph.neighbor_masks()
    n = graph.n
    out: list[int] = []

    def rec(v: int, bits: int) -> None:
        if v == n:
            out.append(bits)
            return
        rec(v + 1, bits)
        if not bits & nmask[v]:
            rec(v + 1, bits | (1 << v))

    rec(0, 0)
    return out


def enumerate_independent_sets(graph: Graph) -> Iterator[Configuration]:
    for bits in independent_set_masks(graph):
        yield Configuration(graph.n, bits)


def _bit_matrix(masks: list[int], n: int) -> np.ndarray:
    arr = np.array(masks, dtype=np.uint64)
    shifts = np.arange(n, dtype=np.uint64)
    return ((arr[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)


def _log_weights(sizes: np.ndarray, lam: float) -> np.ndarray:
    return sizes * math.log(lam)


def gibbs_distribution(graph: Graph, lam: float) -> tuple[list[int], np.ndarray]:
    """Independent sets (bitmasks) and their Gibbs probabilities."""
    _check_lambda(lam)
    masks = independent_set_masks(graph)
    sizes = np.array([bin(m).count("1") for m in masks], dtype=np.float64)
    logw = _log_weights(sizes, lam)
    logw -= logw.max()
    w = np.exp(logw)
    return masks, w / w.sum()


def partition_function(graph: Graph, lam: float) -> PartitionValue:
    """``Z = sum over independent sets of lam**|set|``, accumulated in log space."""
    _check_lambda(lam)
    masks = independent_set_masks(graph)
    counts: dict[int, int] = {}
    for m in masks:
        k = bin(m).count("1")
        counts[k] = counts.get(k, 0) + 1
    terms = [math.log(c) + k * math.log(lam) for k, c in counts.items()]
    top = max(terms)
    log_z = top + math.log(math.fsum(math.exp(t - top) for t in terms))
    exact = None
    if graph.n <= EXACT_VALUE_MAX_N:
        try:
            exact = math.fsum(c * lam ** k for k, c in counts.items())
        except OverflowError:
            exact = None
    return PartitionValue(log_value=log_z, exact_value=exact)


def _conditioned(graph: Graph, lam: float, pinning: Pinning) -> tuple[np.ndarray, np.ndarray]:
    """Occupancy bit matrix and probabilities of the sets compatible with ``pinning``."""
    pinning.validate(graph)
    masks, probs = gibbs_distribution(graph, lam)
    keep = [i for i, m in enumerate(masks) if pinning.agrees_with(m)]
    bits = _bit_matrix([masks[i] for i in keep], graph.n)
    p = probs[keep]
    return bits, p / p.sum()


def marginal(graph: Graph, lam: float, v: int, pinning: Pinning | None = None) -> float:
    """``Pr[sigma_v = 1]`` under the (conditional) Gibbs distribution."""
    pinning = pinning or EMPTY_PINNING
    if not 0 <= v < graph.n:
        raise ValueError(f"vertex {v} out of range")
    if v in pinning.values:
        raise ValueError(f"vertex {v} is pinned")
    bits, p = _conditioned(graph, lam, pinning)
    return float(p @ bits[:, v])


def _influence_from_moments(bits: np.ndarray, p: np.ndarray, free: list[int]) -> np.ndarray:
    b = bits[:, free]
    one = p @ b                                     # Pr[sigma_i = 1]
    joint = (b * p[:, None]).T @ b                  # Pr[sigma_i = 1, sigma_j = 1]
    given_one = joint / one[:, None]
    given_zero = (one[None, :] - joint) / (1.0 - one)[:, None]
    psi = given_one - given_zero
    np.fill_diagonal(psi, 1.0)
    return psi


def influence_matrix(graph: Graph, lam: float, pinning: Pinning | None = None) -> InfluenceMatrix:
    """Pairwise influence matrix over the unfixed vertices, ascending order."""
    pinning = pinning or EMPTY_PINNING
    bits, p = _conditioned(graph, lam, pinning)
    free = free_vertices(graph, pinning)
    return InfluenceMatrix(free=tuple(free), entries=_influence_from_moments(bits, p, free))


def si_constants(psi: InfluenceMatrix | np.ndarray) -> SIReport:
    """Max absolute row sum and max eigenvalue of an influence matrix."""
    m = psi.entries if isinstance(psi, InfluenceMatrix) else np.asarray(psi, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("influence matrix must be square")
    if m.shape[0] == 0:
        return SIReport(0.0, 0.0)
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver failed: {exc}") from exc
    if np.max(np.abs(eig.imag)) > EIGEN_IMAG_TOL:
        raise EigenError(f"influence matrix has complex eigenvalues (imag {np.max(np.abs(eig.imag)):.3e})")
    return SIReport(inf_norm=float(np.abs(m).sum(axis=1).max()),
                    max_eigenvalue=float(eig.real.max()))


@dataclass(frozen=True)
class WorstPinning:
    inf_norm: SIReport
    inf_norm_witness: Pinning
    eigen: SIReport
    eigen_witness: Pinning

    @property
    def report(self) -> SIReport:
        return SIReport(self.inf_norm.inf_norm, self.eigen.max_eigenvalue)

    @property
    def witness(self) -> Pinning:
        return self.inf_norm_witness


def _zero_pins_outside(n: int, subset: int) -> Pinning:
    return Pinning({v: 0 for v in range(n) if not subset >> v & 1})


def worst_pinning_si(graph: Graph, lam: float) -> WorstPinning:
    """Largest SI constants over all valid pinnings, with achieving pinnings.

    A pinning conditions the model to the hardcore model on an induced
    subgraph, and every induced subgraph is reached by pinning its complement
    to 0. Both SI quantities of a disjoint union are maxima over components,
    so it is enough to scan the empty pinning and the connected induced
    subgraphs. Ties keep the first pinning seen, the empty one first.
    """
    _check_lambda(lam)
    if graph.n > MAX_PINNING_SCAN_N:
        raise SizeLimitError(f"n={graph.n} exceeds the pinning scan limit {MAX_PINNING_SCAN_N}")
    if graph.n == 0:
        empty = SIReport(0.0, 0.0)
        return WorstPinning(empty, EMPTY_PINNING, empty, EMPTY_PINNING)
    masks, probs = gibbs_distribution(graph, lam)
    bits = _bit_matrix(masks, graph.n)
    mask_arr = np.array(masks, dtype=np.uint64)
    full = (1 << graph.n) - 1

    def report_for(subset: int) -> SIReport:
        if subset == full:
            b, p = bits, probs
        else:
            keep = (mask_arr & np.uint64(full & ~subset)) == 0
            b, p = bits[keep], probs[keep]
            p = p / p.sum()
        free = [v for v in range(graph.n) if subset >> v & 1]
        return si_constants(_influence_from_moments(b, p, free))

    best_norm = best_eig = report_for(full)
    norm_subset = eig_subset = full
    for subset in connected_vertex_subsets(graph):
        if subset == full:
            continue
        rep = report_for(subset)
        if rep.inf_norm > best_norm.inf_norm + TIE_TOL:
            best_norm, norm_subset = rep, subset
        if rep.max_eigenvalue > best_eig.max_eigenvalue + TIE_TOL:
            best_eig, eig_subset = rep, subset
    return WorstPinning(best_norm, _zero_pins_outside(graph.n, norm_subset),
                        best_eig, _zero_pins_outside(graph.n, eig_subset))


def all_valid_pinnings(graph: Graph) -> Iterator[Pinning]:
    """Every pinning with positive probability (3**n candidates, pruned)."""
    if graph.n > 12:
        raise SizeLimitError("direct pinning enumeration is limited to n <= 12")
    nmask = graph.neighbor_masks()
    n = graph.n

    def rec(v: int, values: dict[int, int], ones: int):
        if v == n:
            yield Pinning(values)
            return
        yield from rec(v + 1, values, ones)
        values[v] = 0
        yield from rec(v + 1, values, ones)
        if not ones & nmask[v]:
            values[v] = 1
            yield from rec(v + 1, values, ones | (1 << v))
        del values[v]

    yield from rec(0, {}, 0)
