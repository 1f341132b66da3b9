"""Independent reference computations used to freeze and cross-check expected values.

Nothing here calls into the package's enumeration, recursion or bisection
code; the oracles only share the ``Graph`` container.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy import optimize


def edges_of(graph):
    return [(u, v) for u in range(graph.n) for v in graph.adjacency[u] if u < v]


def all_independent_sets(graph):
    """Filter all 2**n spin vectors; returns tuples of 0/1."""
    edges = edges_of(graph)
    out = []
    for spins in itertools.product((0, 1), repeat=graph.n):
        if all(not (spins[u] and spins[v]) for u, v in edges):
            out.append(spins)
    return out


def partition_by_deletion(graph, lam):
    """``Z(G) = Z(G - v) + lam * Z(G - N[v])`` on frozensets of vertices."""
    adj = [set(a) for a in graph.adjacency]

    @lru_cache(maxsize=None)
    def z(vertices: frozenset) -> float:
        if not vertices:
            return 1.0
        v = min(vertices)
        return z(vertices - {v}) + lam * z(vertices - {v} - adj[v])

    return z(frozenset(range(graph.n)))


def conditional_occupation(graph, lam, target, given=None):
    """``Pr[sigma_target = 1 | sigma_k = s for (k, s) in given]`` by direct summation."""
    given = given or {}
    num = den = 0.0
    for spins in all_independent_sets(graph):
        if any(spins[k] != s for k, s in given.items()):
            continue
        w = lam ** sum(spins)
        den += w
        if spins[target]:
            num += w
    return num / den


def influence_by_definition(graph, lam, pins=None):
    """Influence matrix entry by entry from conditional probabilities."""
    pins = dict(pins or {})
    ones = {v for v, s in pins.items() if s == 1}
    blocked = {u for v in ones for u in graph.adjacency[v]}
    free = [v for v in range(graph.n) if v not in pins and v not in blocked]
    psi = np.zeros((len(free), len(free)))
    for a, i in enumerate(free):
        for b, j in enumerate(free):
            if i == j:
                psi[a, b] = 1.0
                continue
            p1 = conditional_occupation(graph, lam, j, {**pins, i: 1})
            p0 = conditional_occupation(graph, lam, j, {**pins, i: 0})
            psi[a, b] = p1 - p0
    return free, psi


def recurrence(d, lam, x):
    w = lam * (1 - x) ** d
    return w / (1 + w)


def fixed_point_bisect_F(d, lam, tol=1e-15):
    """Bisection on ``F(x) - x`` (decreasing in x) over ``[0, 1]``."""
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if recurrence(d, lam, mid) - mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fixed_point_brentq(d, lam):
    return optimize.brentq(lambda x: recurrence(d, lam, x) - x, 0.0, 1.0, xtol=1e-16, rtol=1e-15)


def lambda_c(Delta):
    return (Delta - 1) ** (Delta - 1) / (Delta - 2) ** Delta


def count_rooted_trees(max_n, max_children, root_max_children=None):
    """Counts of unlabelled rooted trees by size via multiset compositions.

    ``t[s]`` counts trees of size s whose vertices have at most c children;
    a root with k children is a multiset of k such trees.
    """
    c = max_children
    root_c = c if root_max_children is None else root_max_children
    t = [0] * (max_n + 1)

    def forests(total, slots, counts):
        # number of multisets of <= slots trees with sizes summing to total
        # dp over tree sizes: choose multiplicity m of each size s
        dp = [[0] * (slots + 1) for _ in range(total + 1)]
        dp[0][0] = 1
        for s in range(1, total + 1):
            if counts[s] == 0:
                continue
            new = [row[:] for row in dp]
            for tot in range(total + 1):
                for k in range(slots + 1):
                    if dp[tot][k] == 0:
                        continue
                    m = 1
                    while tot + m * s <= total and k + m <= slots:
                        new[tot + m * s][k + m] += dp[tot][k] * math.comb(counts[s] + m - 1, m)
                        m += 1
            dp = new
        return sum(dp[total])

    for size in range(1, max_n + 1):
        t[size] = forests(size - 1, c, t)
    if root_c == c:
        return t[1:]
    return [forests(size - 1, root_c, t) for size in range(1, max_n + 1)]


def self_avoiding_walks(graph, u):
    """All self-avoiding walks from u (including the trivial walk)."""
    out = []

    def extend(walk):
        out.append(tuple(walk))
        for w in graph.adjacency[walk[-1]]:
            if w not in walk:
                extend(walk + [w])

    extend([u])
    return out


def gibbs_vector(graph, lam, states):
    w = np.array([lam ** bin(s).count("1") for s in states], dtype=float)
    return w / w.sum()


def asymptotic_variance(P, mu, f):
    """Exact asymptotic variance of the time average of f along a stationary chain."""
    n = len(mu)
    fbar = f - mu @ f
    fundamental = np.linalg.inv(np.eye(n) - P + np.outer(np.ones(n), mu))
    return float(2 * mu @ (fbar * (fundamental @ fbar)) - mu @ (fbar * fbar))
