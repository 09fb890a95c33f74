"""Ant colony optimization with a tour adapter and a gray-level
multi-threshold adapter.

An adapter ("problem") exposes:

* ``n_nodes``, ``eta`` (``n_nodes x n_nodes`` heuristic, > 0), ``start``
* ``path_length``: nodes per complete path, start included
* ``closed``: whether the path returns to its start (tours)
* ``cost(path)``: positive path cost C_k, lower is better
"""

from dataclasses import dataclass, field
import csv
import io
import itertools

import numpy as np

from .errors import InfeasibleK, ZeroDenominator


@dataclass(frozen=True)
class AcoParams:
    alpha: float = 1.0
    beta: float = 2.0
    rho: float = 0.5
    big_h: float = 1.0
    ants: int = 20
    iterations: int = 50
    tau0: float = 1.0
    tau_min: float = 1e-4
    tau_max: float = 10.0
    seed: int = 0
    # Pseudo-random proportional rule: with probability q0 take the argmax
    # move instead of sampling. 0 disables it.
    q0: float = 0.0

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        if self.ants < 1:
            raise ValueError(f"ants must be >= 1, got {self.ants}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not self.tau_min <= self.tau0 <= self.tau_max:
            raise ValueError("need tau_min <= tau0 <= tau_max")
        if self.tau_min <= 0:
            raise ValueError("tau_min must be > 0")
        if not 0 <= self.q0 <= 1:
            raise ValueError(f"q0 must lie in [0, 1], got {self.q0}")


@dataclass(frozen=True)
class PheromoneState:
    tau: np.ndarray
    eta: np.ndarray

    @classmethod
    def initial(cls, eta, params):
        eta = np.asarray(eta, dtype=np.float64)
        if np.any(eta <= 0):
            raise ValueError("heuristic entries must be > 0")
        return cls(np.full(eta.shape, float(params.tau0)), eta)


@dataclass(frozen=True)
class AntPath:
    visited: tuple
    cost: float
    tabu: frozenset = field(default=frozenset())
    closed: bool = False

    def edges(self):
        pairs = list(zip(self.visited[:-1], self.visited[1:]))
        if self.closed and len(self.visited) > 1:
            pairs.append((self.visited[-1], self.visited[0]))
        return pairs


@dataclass(frozen=True)
class AcoResult:
    best: AntPath
    trace: list            # (iteration, best_cost, mean_cost)
    state: PheromoneState

    def trace_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "best_cost", "mean_cost"])
        for it, best, mean in self.trace:
            w.writerow([it, repr(float(best)), repr(float(mean))])
        return buf.getvalue()


def transition_probabilities(state, current, unvisited, params):
    """Move probabilities from ``current``: proportional to tau^alpha * eta^beta
    over ``unvisited`` and zero for every other node."""
    idx = np.fromiter(sorted(unvisited), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("no unvisited nodes to move to")
    attract = state.tau[current, idx] ** params.alpha * state.eta[current, idx] ** params.beta
    total = attract.sum()
    if not total > 0:
        raise ZeroDenominator(f"all move weights from node {current} vanish")
    probs = np.zeros(state.tau.shape[0])
    probs[idx] = attract / total
    return probs


def update_pheromones(state, completed, params):
    """Evaporate every edge by (1 - rho), deposit H / C_k along each ant's
    edges, then clamp to [tau_min, tau_max]."""
    tau = (1.0 - params.rho) * state.tau
    for path in completed:
        if not path.cost > 0:
            raise ValueError(f"path cost must be > 0 for deposits, got {path.cost}")
        deposit = params.big_h / path.cost
        for x, y in path.edges():
            tau[x, y] += deposit
            if x != y:
                tau[y, x] += deposit
    np.clip(tau, params.tau_min, params.tau_max, out=tau)
    return PheromoneState(tau, state.eta)


def _move_weights(state, params):
    return state.tau ** params.alpha * state.eta ** params.beta


def _build_path(problem, weights, params, rng):
    # Same rule as transition_probabilities, on a precomputed weight matrix.
    n = problem.n_nodes
    current = problem.start
    visited = [current]
    open_ = np.ones(n, dtype=bool)
    open_[current] = False
    while len(visited) < problem.path_length:
        w = np.where(open_, weights[current], 0.0)
        total = w.sum()
        if not total > 0:
            raise ZeroDenominator(f"all move weights from node {current} vanish")
        if params.q0 > 0 and rng.random() < params.q0:
            nxt = int(np.argmax(w))
        else:
            cdf = np.cumsum(w)
            nxt = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
            nxt = min(nxt, n - 1)
            while w[nxt] == 0:
                # Round-off can land on a zero-weight slot; step back.
                nxt -= 1
        visited.append(nxt)
        open_[nxt] = False
        current = nxt
    tabu = frozenset(np.flatnonzero(open_).tolist())
    return AntPath(tuple(visited), float(problem.cost(visited)), tabu, bool(problem.closed))


def run_aco(problem, params=None):
    """Run the colony; returns the best path ever seen and a per-iteration trace.

    Each ant draws from its own child of the seed sequence, so results do not
    depend on the order ants are evaluated in.
    """
    params = params or AcoParams()
    state = PheromoneState.initial(problem.eta, params)
    if problem.path_length <= 1:
        only = AntPath((problem.start,), float(problem.cost([problem.start])),
                       frozenset(set(range(problem.n_nodes)) - {problem.start}),
                       bool(problem.closed))
        return AcoResult(only, [(0, only.cost, only.cost)], state)
    seq = np.random.SeedSequence(params.seed)
    best = None
    trace = []
    for it in range(params.iterations):
        streams = seq.spawn(params.ants)
        weights = _move_weights(state, params)
        paths = [_build_path(problem, weights, params, np.random.default_rng(s))
                 for s in streams]
        for p in paths:
            if best is None or p.cost < best.cost:
                best = p
        state = update_pheromones(state, paths, params)
        trace.append((it, best.cost, float(np.mean([p.cost for p in paths]))))
    return AcoResult(best, trace, state)


class TourProblem:
    """Closed tour over all nodes of a symmetric distance matrix."""

    closed = True
    start = 0

    def __init__(self, distances):
        d = np.asarray(distances, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        self.distances = d
        self.n_nodes = d.shape[0]
        self.path_length = self.n_nodes
        with np.errstate(divide="ignore"):
            eta = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 1.0)
        self.eta = eta

    def cost(self, path):
        if len(path) < 2:
            return 0.0
        total = sum(self.distances[a, b] for a, b in zip(path[:-1], path[1:]))
        return float(total + self.distances[path[-1], path[0]])

    @classmethod
    def from_points(cls, points):
        pts = np.asarray(points, dtype=np.float64)
        diff = pts[:, None, :] - pts[None, :, :]
        return cls(np.sqrt((diff ** 2).sum(axis=-1)))


def brute_force_tour(problem):
    """Exact optimum by enumerating all tours that start at node 0."""
    n = problem.n_nodes
    best = None
    for perm in itertools.permutations(range(1, n)):
        path = (0,) + perm
        c = problem.cost(path)
        if best is None or c < best[1]:
            best = (path, c)
    return best


def _class_stats(hist):
    p = np.asarray(hist, dtype=np.float64)
    p = p / p.sum()
    g = np.arange(p.size, dtype=np.float64)
    return p, np.cumsum(p), np.cumsum(p * g), float((p * g).sum())


def between_class_variance(hist, thresholds):
    """Between-class variance for classes g <= t1 < g <= t2 < ... ."""
    p, cw, cm, mu = _class_stats(hist)
    edges = [-1] + sorted(int(t) for t in thresholds) + [p.size - 1]
    var = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        w = cw[hi] - (cw[lo] if lo >= 0 else 0.0)
        if w <= 0:
            continue
        m = (cm[hi] - (cm[lo] if lo >= 0 else 0.0)) / w
        var += w * (m - mu) ** 2
    return float(var)


def total_variance(hist):
    p, _, _, mu = _class_stats(hist)
    g = np.arange(p.size, dtype=np.float64)
    return float((p * (g - mu) ** 2).sum())


class ThresholdProblem:
    """Choose ``k`` gray-level thresholds maximizing between-class variance.

    Node 0 is a nest every ant leaves from; node i >= 1 stands for the
    candidate threshold ``levels[i - 1]``. Only occupied gray levels (except
    the brightest) are candidates, since any threshold between two occupied
    levels gives the same partition.

    Path cost is ``cost_floor + 1 - sigma_B^2 / sigma_T^2``: positive, and
    ordered exactly like the negated between-class variance.
    """

    closed = False
    start = 0

    def __init__(self, histogram, k=1, cost_floor=0.05):
        hist = np.asarray(histogram, dtype=np.float64)
        if hist.ndim != 1 or hist.size != 256:
            raise ValueError("histogram must have 256 bins")
        if hist.sum() <= 0:
            raise ValueError("histogram is empty")
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        occupied = np.flatnonzero(hist > 0)
        if k >= occupied.size:
            raise InfeasibleK(f"k={k} needs more than {occupied.size} distinct gray levels")
        self.histogram = hist
        self.k = int(k)
        self.occupied = occupied
        self.levels = occupied[:-1]
        self.cost_floor = float(cost_floor)
        self.sigma_t = total_variance(hist)
        self.n_nodes = self.levels.size + 1
        self.path_length = self.k + 1
        self.eta = self._heuristic()

    def _heuristic(self):
        lv = self.levels.astype(np.float64)
        eta = np.ones((self.n_nodes, self.n_nodes))
        eta[1:, 1:] = 1.0 / (1.0 + np.abs(lv[:, None] - lv[None, :]))
        # Leaving the nest: prefer levels that separate well on their own.
        single = np.array([between_class_variance(self.histogram, [t]) for t in self.levels])
        eta[0, 1:] = np.maximum(single / self.sigma_t, 1e-6)
        eta[1:, 0] = eta[0, 1:]
        return eta

    def thresholds(self, path):
        return sorted(int(self.levels[i - 1]) for i in path if i != 0)

    def cost(self, path):
        ts = self.thresholds(path)
        if not ts:
            return self.cost_floor + 1.0
        return self.cost_floor + 1.0 - between_class_variance(self.histogram, ts) / self.sigma_t

    def canonical(self, thresholds):
        """Move each threshold to the middle of its gap between occupied levels."""
        out = []
        for t in thresholds:
            nxt = int(self.occupied[np.searchsorted(self.occupied, t, side="right")])
            out.append((int(t) + nxt) // 2)
        return out


def threshold_adapter(histogram, k=1, cost_floor=0.05):
    return ThresholdProblem(histogram, k, cost_floor)


def exhaustive_thresholds(histogram, k=1):
    """Best k thresholds over all 256-level combinations (k=1 and k=2 are cheap)."""
    hist = np.asarray(histogram, dtype=np.float64)
    best = None
    for combo in itertools.combinations(range(256), k):
        v = between_class_variance(hist, combo)
        if best is None or v > best[1]:
            best = (list(combo), v)
    return best


def gray_histogram(img):
    return np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)


# Slow evaporation and a high, tight pheromone band keep unexplored levels
# attractive long enough for every near-optimal level to be tried.
THRESHOLD_PARAMS = AcoParams(rho=0.05, iterations=100, tau0=10.0, tau_min=0.1, tau_max=10.0)


def aco_thresholds(img, k=1, params=None):
    """Canonical thresholds chosen by the colony for a gray image."""
    problem = ThresholdProblem(gray_histogram(img), k)
    result = run_aco(problem, params or THRESHOLD_PARAMS)
    return problem.canonical(problem.thresholds(result.best.visited)), result


def segment(img, thresholds):
    """Class index per pixel: 0 for g <= t1, 1 for t1 < g <= t2, ..."""
    ts = np.asarray(sorted(thresholds))
    return np.searchsorted(ts, np.asarray(img), side="left").astype(np.uint8)

