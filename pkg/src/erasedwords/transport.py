"""Distances between measures and the coupling bounds used to certify
convergence numerically.

Ground metric choices: the discrete metric on letters, |u - u'| on
positions, and their sum on the product. On word laws the discrete metric
makes the optimal-transport distance equal to total variation, which is
what ``total_variation`` computes. On letter x position measures the exact
distance is solved as a min-cost flow over a small metric graph: one track
of position nodes per letter (step cost = position gap) plus unit-cost
letter switches at equal positions. Shortest paths in that graph reproduce
the ground metric exactly, so the flow optimum is the transport optimum.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .kernels import WordDistribution
from .measures import DirectingMeasure, FiniteMeasure2D, _piecewise_cumulative, _poly_eval

SUPPORT_LIMIT = 4096


def total_variation(p: WordDistribution, q: WordDistribution):
    """Half the absolute difference of the two weight vectors.

    Exactness follows the inputs: rational weights in, rational result out.
    """
    if p.length != q.length:
        raise ValueError(f"word lengths differ: {p.length} vs {q.length}")
    keys = set(p.weights) | set(q.weights)
    zero = Fraction(0)
    total = sum(abs(p.weights.get(v, zero) - q.weights.get(v, zero)) for v in keys)
    if isinstance(total, Fraction):
        return total / 2
    return total / 2


def wasserstein(p: FiniteMeasure2D, q: FiniteMeasure2D) -> float:
    """Exact transport distance for d((a,u),(b,v)) = 1(a != b) + |u - v|."""
    if p.support_size > SUPPORT_LIMIT or q.support_size > SUPPORT_LIMIT:
        raise ValueError(
            f"supports of sizes {p.support_size} and {q.support_size} exceed "
            f"the exact-solver budget of {SUPPORT_LIMIT} atoms per side; "
            "use transport_upper_bound"
        )
    m = max(a for a, _, _ in p.atoms + q.atoms)
    positions = sorted({u for _, u, _ in p.atoms} | {u for _, u, _ in q.atoms})
    pos_index = {u: t for t, u in enumerate(positions)}
    npos = len(positions)

    def node(a, t):
        return (a - 1) * npos + t

    hub = lambda t: m * npos + t  # noqa: E731
    nnodes = (m + 1) * npos

    demand = np.zeros(nnodes)
    for a, u, mass in q.atoms:
        demand[node(a, pos_index[u])] += mass
    for a, u, mass in p.atoms:
        demand[node(a, pos_index[u])] -= mass

    tails, heads, costs = [], [], []

    def arc(u, v, c):
        tails.append(u)
        heads.append(v)
        costs.append(c)

    for a in range(1, m + 1):
        for t in range(npos - 1):
            gap = positions[t + 1] - positions[t]
            arc(node(a, t), node(a, t + 1), gap)
            arc(node(a, t + 1), node(a, t), gap)
    for t in range(npos):
        for a in range(1, m + 1):
            arc(node(a, t), hub(t), 0.5)
            arc(hub(t), node(a, t), 0.5)

    narcs = len(costs)
    rows = np.concatenate([np.array(heads), np.array(tails)])
    cols = np.concatenate([np.arange(narcs), np.arange(narcs)])
    vals = np.concatenate([np.ones(narcs), -np.ones(narcs)])
    balance = coo_matrix((vals, (rows, cols)), shape=(nnodes, narcs))
    result = linprog(
        c=np.array(costs),
        A_eq=balance,
        b_eq=demand,
        bounds=(0, None),
        method="highs",
    )
    if not result.success:
        raise RuntimeError(f"transport solve failed: {result.message}")
    return float(result.fun)


def transport_upper_bound(p: FiniteMeasure2D, q: FiniteMeasure2D) -> float:
    """Feasible-plan cost for large supports: optimal within each letter,
    greedy sorted matching for cross-letter leftovers. Always an upper
    bound on the exact distance, never reported as the distance itself."""
    m = max(a for a, _, _ in p.atoms + q.atoms)
    cost = 0.0
    left_p: list[tuple[float, float]] = []
    left_q: list[tuple[float, float]] = []
    for a in range(1, m + 1):
        pa = [(u, w) for letter, u, w in p.atoms if letter == a]
        qa = [(u, w) for letter, u, w in q.atoms if letter == a]
        matched, rest_p, rest_q = _match_sorted(pa, qa)
        cost += matched
        left_p.extend(rest_p)
        left_q.extend(rest_q)
    left_p.sort()
    left_q.sort()
    i = j = 0
    ri = rj = 0.0
    while i < len(left_p) and j < len(left_q):
        ui, wi = left_p[i]
        uj, wj = left_q[j]
        take = min(wi - ri, wj - rj)
        cost += take * (1.0 + abs(ui - uj))
        ri += take
        rj += take
        if ri >= wi - 1e-15:
            i += 1
            ri = 0.0
        if rj >= wj - 1e-15:
            j += 1
            rj = 0.0
    return cost


def _match_sorted(pa, qa):
    """1D transport between same-letter atom lists up to the common mass."""
    pa = sorted(pa)
    qa = sorted(qa)
    total_p = sum(w for _, w in pa)
    total_q = sum(w for _, w in qa)
    common = min(total_p, total_q)
    if common <= 0:
        return 0.0, pa, qa
    scale_p = common / total_p
    scale_q = common / total_q
    cost = 0.0
    i = j = 0
    ri = rj = 0.0
    rest_p, rest_q = [], []
    while i < len(pa) and j < len(qa):
        ui, wi = pa[i][0], pa[i][1] * scale_p
        uj, wj = qa[j][0], qa[j][1] * scale_q
        take = min(wi - ri, wj - rj)
        cost += take * abs(ui - uj)
        ri += take
        rj += take
        if ri >= wi - 1e-15:
            i += 1
            ri = 0.0
        if rj >= wj - 1e-15:
            j += 1
            rj = 0.0
    if total_p > common:
        rest_p = [(u, w * (1 - scale_p)) for u, w in pa]
    if total_q > common:
        rest_q = [(u, w * (1 - scale_q)) for u, w in qa]
    return cost, rest_p, rest_q


def exact_collision_bound(n: int, k: int) -> Fraction:
    """Probability that k iid uniform picks from n items collide."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k} n={n}")
    no_collision = Fraction(1)
    for j in range(k):
        no_collision *= Fraction(n - j, n)
    return 1 - no_collision


def collision_bound(n: int, k: int, diameter: float = 1.0) -> float:
    """Coupling bound diameter * [1 - n! / ((n-k)! n^k)] on the distance
    between the subsequence law and the sorted-draw law of a word's
    position measure."""
    return diameter * float(exact_collision_bound(n, k))


def shared_rank_discrepancy(k: int, m: int, reps: int, rng) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the relative-rank gap
    |rank_k/k - rank_m/m| of the first draw within a shared uniform
    sequence; this bounds the distance between position samples at the
    two lengths and vanishes as min(k, m) grows."""
    if min(k, m) < 1 or reps < 1:
        raise ValueError("lengths and reps must be positive")
    top = max(k, m)
    u = rng.random((reps, top))
    rank_k = 1 + (u[:, 1:k] < u[:, :1]).sum(axis=1)
    rank_m = 1 + (u[:, 1:m] < u[:, :1]).sum(axis=1)
    gaps = np.abs(rank_k / k - rank_m / m)
    return float(gaps.mean()), float(gaps.std(ddof=1) / math.sqrt(reps))


# ---------------------------------------------------------------------------
# binary geometry


def word_curve(word) -> np.ndarray:
    """Cumulative letter-count path of a binary word, scaled by 1/n.

    Point i is (ones among the first i letters, zeros among the first i
    letters) / n, for i = 0..n.
    """
    word = np.asarray(word, dtype=int)
    if word.size == 0:
        raise ValueError("empty word")
    if not np.all((word == 1) | (word == 2)):
        raise ValueError("curve is defined for binary alphabets only")
    n = word.size
    bits = word - 1
    ones = np.concatenate(([0], np.cumsum(bits))) / n
    steps = np.arange(n + 1) / n
    return np.column_stack([ones, steps - ones])


def measure_curve(measure: DirectingMeasure, grid: int = 512) -> np.ndarray:
    """Cumulative letter-mass path of a binary measure, sampled on a grid.

    Point t is (mass of letter 2 on [0,t], mass of letter 1 on [0,t]), the
    same coordinate order as word_curve, so word curves of growing
    simulated words converge to this set in Hausdorff distance.
    """
    if measure.size != 2:
        raise ValueError("curve is defined for binary alphabets only")
    cums = [
        _piecewise_cumulative(measure.breaks, measure.cond[a]) for a in (0, 1)
    ]
    points = np.empty((grid + 1, 2))
    for j in range(grid + 1):
        t = Fraction(j, grid)
        ones = _piecewise_at(measure.breaks, cums[1], t)
        zeros = _piecewise_at(measure.breaks, cums[0], t)
        points[j] = (float(ones), float(zeros))
    return points


def _piecewise_at(breaks, pieces, t):
    for p in range(len(pieces)):
        if t <= breaks[p + 1]:
            return _poly_eval(pieces[p], t)
    return _poly_eval(pieces[-1], breaks[-1])


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between finite point sets under the Euclidean
    metric on the unit square."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("point sets must be nonempty")
    d2 = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
    forward = np.sqrt(d2.min(axis=1)).max()
    backward = np.sqrt(d2.min(axis=0)).max()
    return float(max(forward, backward))


# ---------------------------------------------------------------------------
# dyadic letter quantization for [0,1]-valued letters


def dyadic_level(u, depth: int):
    """Quantize values in [0,1] to 2**depth levels: level ceil(2^depth u),
    with 0 mapped to level 1."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    scaled = np.ceil(np.asarray(u, dtype=float) * (1 << depth)).astype(np.int64)
    out = np.clip(scaled, 1, 1 << depth)
    if np.ndim(u) == 0:
        return int(out)
    return out


def relabel_letters(
    measure: DirectingMeasure, mapping: dict[int, int], size: int
) -> DirectingMeasure:
    """Push the measure through a letter map: conditional weights of the
    image letter are the summed weights of its preimages."""
    npieces = len(measure.breaks) - 1
    width = max(len(piece) for qa in measure.cond for piece in qa)
    cond = [
        [[Fraction(0)] * width for _ in range(npieces)] for _ in range(size)
    ]
    for a, qa in enumerate(measure.cond, start=1):
        b = mapping[a]
        if not 1 <= b <= size:
            raise ValueError(f"image letter {b} outside 1..{size}")
        for p, piece in enumerate(qa):
            for i, c in enumerate(piece):
                cond[b - 1][p][i] += c
    return DirectingMeasure(
        breaks=measure.breaks,
        cond=tuple(tuple(tuple(piece) for piece in qa) for qa in cond),
        kind=measure.kind,
        params={**measure.params, "relabelled": True},
        projection_residual=measure.projection_residual,
    )
