"""Particle competition and cooperation dynamics for transductive graph labeling.

One particle is spawned per labeled node (its "home"). Particles walk the
graph; teammates (same class) raise their team's domination level on visited
nodes while lowering rivals', keeping each node's domination vector summing
to 1. A particle's strength tracks its team's domination at its current node,
scaling the change it can inflict. Walks mix a uniform random rule with a
greedy rule that prefers own-territory neighbors close to home, and a
particle that fails to dominate the node it steps onto is expelled back to
its previous node. Nodes are finally labeled by the dominant team.

The per-move operations (`choose_move`, `apply_visit`) are plain Python; a
numba kernel replays the identical operation sequence (same RNG draws, same
float order) for long runs, so both execution paths produce bit-identical
states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _HAVE_NUMBA = False

# Default stop rule: check domination drift every `conv_check_interval`
# sweeps, stop when the mean over nodes of the largest per-class change
# drops below `conv_epsilon`, with a hard cap on total sweeps.
_AUTO_SWEEP_BUDGET = 500_000
_AUTO_SWEEP_FLOOR = 10_000


@dataclass
class PccConfig:
    """Dynamics constants. All fields are overridable; defaults follow common
    conventions for this family of models and are not tuned per dataset."""

    p_grd: float = 0.6
    delta_v: float = 0.1
    dist_exponent: float = 2.0
    max_sweeps: int | None = None  # None: max(10000, ceil(500000 / particle count))
    conv_epsilon: float = 1e-3
    conv_check_interval: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_grd <= 1.0:
            raise ValueError(f"p_grd must be in [0, 1], got {self.p_grd}")
        if not 0.0 < self.delta_v <= 1.0:
            raise ValueError(f"delta_v must be in (0, 1], got {self.delta_v}")
        if self.dist_exponent < 0.0:
            raise ValueError(f"dist_exponent must be >= 0, got {self.dist_exponent}")
        if self.max_sweeps is not None and self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.conv_epsilon <= 0.0:
            raise ValueError(f"conv_epsilon must be > 0, got {self.conv_epsilon}")
        if self.conv_check_interval < 1:
            raise ValueError(
                f"conv_check_interval must be >= 1, got {self.conv_check_interval}"
            )

    def sweep_cap(self, num_particles: int) -> int:
        if self.max_sweeps is not None:
            return self.max_sweeps
        return max(_AUTO_SWEEP_FLOOR, math.ceil(_AUTO_SWEEP_BUDGET / num_particles))


@dataclass
class Particle:
    """Walking agent: team (class), current node, strength in [0, 1], and a
    per-node hop-distance estimate to its home node (0 at home, n-1 before
    any relaxation)."""

    home: int
    team: int
    position: int
    strength: float
    dist: np.ndarray


@dataclass
class PccState:
    graph: Graph
    domination: np.ndarray  # n x C, rows sum to 1
    labels: np.ndarray  # per-node fixed class, -1 = unlabeled
    particles: list[Particle]
    config: PccConfig
    sweep_count: int = 0
    # shared storage behind the particles' dist rows (set by pcc_init); the
    # fast sweep kernel requires it, hand-built states may leave it None
    dist_matrix: np.ndarray | None = field(default=None, repr=False)
    damping_table: np.ndarray | None = field(default=None, repr=False)


@dataclass
class Prediction:
    """Final labeling: per-node argmax class (ties -> lowest index), the final
    domination matrix, and how the run ended."""

    labels: np.ndarray
    domination: np.ndarray
    sweeps: int
    converged: bool


def _damping(state: PccState) -> np.ndarray:
    # (1 + hops)^-dist_exponent lookup, shared by both execution paths so the
    # greedy weights are bit-identical
    if state.damping_table is None:
        hops = 1.0 + np.arange(state.graph.n, dtype=np.float64)
        state.damping_table = hops ** (-state.config.dist_exponent)
    return state.damping_table


def pcc_init(
    graph: Graph, labels, config: PccConfig, num_classes: int | None = None
) -> PccState:
    """Build the initial state: one particle per labeled node, at home, at
    full strength; labeled domination rows one-hot, unlabeled rows uniform."""
    arr = np.array(
        [-1 if lab is None else int(lab) for lab in labels], dtype=np.int64
    )
    n = graph.n
    if arr.shape[0] != n:
        raise ValueError(f"{arr.shape[0]} labels for {n} graph nodes")
    labeled = np.flatnonzero(arr >= 0)
    if labeled.size == 0:
        raise ValueError("no labeled nodes")
    present = np.unique(arr[labeled])
    if present.size < 2:
        raise ValueError(f"need >= 2 classes among labels, got {present.size}")
    c = num_classes if num_classes is not None else int(arr.max()) + 1
    if int(arr.max()) >= c:
        raise ValueError(f"label {int(arr.max())} out of range for {c} classes")

    domination = np.full((n, c), 1.0 / c, dtype=np.float64)
    domination[labeled] = 0.0
    domination[labeled, arr[labeled]] = 1.0

    dist_matrix = np.full((labeled.size, n), n - 1, dtype=np.int32)
    particles = []
    for row, i in enumerate(labeled):  # flatnonzero is ascending: fixed home order
        if graph.neighbors[i].size == 0:
            raise ValueError(f"labeled node {int(i)} has no neighbors")
        dist_matrix[row, i] = 0
        particles.append(
            Particle(
                home=int(i),
                team=int(arr[i]),
                position=int(i),
                strength=1.0,
                dist=dist_matrix[row],
            )
        )

    return PccState(graph, domination, arr, particles, config, dist_matrix=dist_matrix)


def choose_move(state: PccState, particle: Particle, rng: np.random.Generator) -> int:
    """Pick the next node: greedy rule with probability p_grd, else random rule.

    Greedy weighs each neighbor by the team's domination there, damped by
    (1 + dist-to-home)^-dist_exponent; zero total weight falls back to the
    uniform random rule. Every call consumes exactly two rng draws.
    """
    nbrs = state.graph.neighbors[particle.position]
    if rng.random() < state.config.p_grd:
        w = state.domination[nbrs, particle.team] * _damping(state)[particle.dist[nbrs]]
        cum = np.cumsum(w)
        total = cum[-1]
        if total > 0.0:
            idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
            if idx >= nbrs.size:  # fp round-up at the top edge
                idx = nbrs.size - 1
            return int(nbrs[idx])
    return int(nbrs[int(rng.random() * nbrs.size)])


def apply_visit(state: PccState, particle: Particle, target: int) -> None:
    """Carry out one visit: shift domination (unlabeled targets only), refresh
    strength, relax the distance table, and stay or be expelled.

    Each rival class loses min(delta_v * strength / (C-1), current level) and
    the team gains the total, preserving the row sum. The particle keeps the
    target position only if its team is the strict argmax there.
    """
    prev = particle.position
    row = state.domination[target]
    team = particle.team
    c = row.shape[0]
    if state.labels[target] < 0:
        cap = state.config.delta_v * particle.strength / (c - 1)
        moved = 0.0
        for cls in range(c):
            if cls == team:
                continue
            amount = row[cls]
            if amount > cap:
                amount = cap
            row[cls] -= amount
            moved += amount
        row[team] += moved
    strength = row[team]
    if strength < 0.0:
        strength = 0.0
    elif strength > 1.0:
        strength = 1.0
    particle.strength = float(strength)
    relaxed = particle.dist[prev] + 1
    if relaxed < particle.dist[target]:
        particle.dist[target] = relaxed
    top = row.max()
    if row[team] == top and np.count_nonzero(row == top) == 1:
        particle.position = target


def _python_moves(state: PccState, rng: np.random.Generator) -> None:
    for particle in state.particles:
        target = choose_move(state, particle, rng)
        apply_visit(state, particle, target)


if _HAVE_NUMBA:

    @numba.njit(cache=True)
    def _sweep_kernel(  # pragma: no cover - replayed 1:1 by the Python path
        indptr,
        indices,
        domination,
        labels,
        teams,
        positions,
        strengths,
        dist,
        damping,
        p_grd,
        delta_v,
        n_sweeps,
        rng,
    ):
        num_particles = positions.shape[0]
        c = domination.shape[1]
        for _ in range(n_sweeps):
            for i in range(num_particles):
                pos = positions[i]
                team = teams[i]
                start = indptr[pos]
                end = indptr[pos + 1]
                target = -1
                if rng.random() < p_grd:
                    total = 0.0
                    for e in range(start, end):
                        j = indices[e]
                        total += domination[j, team] * damping[dist[i, j]]
                    if total > 0.0:
                        r = rng.random() * total
                        acc = 0.0
                        target = indices[end - 1]
                        for e in range(start, end):
                            j = indices[e]
                            acc += domination[j, team] * damping[dist[i, j]]
                            if acc > r:
                                target = j
                                break
                if target < 0:
                    target = indices[start + int(rng.random() * (end - start))]

                if labels[target] < 0:
                    cap = delta_v * strengths[i] / (c - 1)
                    moved = 0.0
                    for cls in range(c):
                        if cls == team:
                            continue
                        amount = domination[target, cls]
                        if amount > cap:
                            amount = cap
                        domination[target, cls] -= amount
                        moved += amount
                    domination[target, team] += moved
                strength = domination[target, team]
                if strength < 0.0:
                    strength = 0.0
                elif strength > 1.0:
                    strength = 1.0
                strengths[i] = strength
                relaxed = dist[i, pos] + 1
                if relaxed < dist[i, target]:
                    dist[i, target] = relaxed
                top = domination[target, 0]
                ties = 1
                for cls in range(1, c):
                    v = domination[target, cls]
                    if v > top:
                        top = v
                        ties = 1
                    elif v == top:
                        ties += 1
                if domination[target, team] == top and ties == 1:
                    positions[i] = target


def _gather(state: PccState):
    teams = np.array([p.team for p in state.particles], dtype=np.int64)
    positions = np.array([p.position for p in state.particles], dtype=np.int64)
    strengths = np.array([p.strength for p in state.particles], dtype=np.float64)
    return teams, positions, strengths


def _scatter(state: PccState, positions, strengths) -> None:
    for i, p in enumerate(state.particles):
        p.position = int(positions[i])
        p.strength = float(strengths[i])


def _kernel_ready(state: PccState) -> bool:
    return _HAVE_NUMBA and state.dist_matrix is not None


def _kernel_sweeps(state: PccState, rng, n_sweeps: int, teams, positions, strengths) -> None:
    indptr, indices = state.graph.csr()
    _sweep_kernel(
        indptr,
        indices,
        state.domination,
        state.labels,
        teams,
        positions,
        strengths,
        state.dist_matrix,
        _damping(state),
        state.config.p_grd,
        state.config.delta_v,
        n_sweeps,
        rng,
    )
    state.sweep_count += n_sweeps


def pcc_sweep(state: PccState, rng: np.random.Generator) -> None:
    """One movement of every particle, in fixed (ascending home) order."""
    if _kernel_ready(state):
        teams, positions, strengths = _gather(state)
        _kernel_sweeps(state, rng, 1, teams, positions, strengths)
        _scatter(state, positions, strengths)
    else:
        _python_moves(state, rng)
        state.sweep_count += 1


def _trace_record(state: PccState) -> str:
    return json.dumps(
        {
            "sweep": state.sweep_count,
            "mean_max_domination": float(state.domination.max(axis=1).mean()),
            "particles": [
                [p.position, round(p.strength, 9)] for p in state.particles
            ],
        },
        separators=(",", ":"),
    )


def pcc_run(
    graph: Graph,
    labels,
    config: PccConfig,
    num_classes: int | None = None,
    trace=None,
) -> Prediction:
    """Run the dynamics to convergence or the sweep cap and label every node.

    Convergence: at every conv_check_interval sweeps, the mean over nodes of
    the largest per-class domination change since the previous check is below
    conv_epsilon. Identical (graph, labels, config) always yield an identical
    Prediction; `trace`, if given, receives one JSON record per sweep.
    """
    state = pcc_init(graph, labels, config, num_classes=num_classes)
    rng = np.random.default_rng(config.seed)
    cap = config.sweep_cap(len(state.particles))
    interval = config.conv_check_interval

    snapshot = state.domination.copy()
    converged = False

    def drift_below_epsilon() -> bool:
        drift = float(np.abs(state.domination - snapshot).max(axis=1).mean())
        np.copyto(snapshot, state.domination)
        return drift < config.conv_epsilon

    if trace is None and _kernel_ready(state):
        teams, positions, strengths = _gather(state)
        while state.sweep_count < cap:
            batch = min(interval - state.sweep_count % interval, cap - state.sweep_count)
            _kernel_sweeps(state, rng, batch, teams, positions, strengths)
            if state.sweep_count % interval == 0 and drift_below_epsilon():
                converged = True
                break
        _scatter(state, positions, strengths)
    else:
        while state.sweep_count < cap:
            pcc_sweep(state, rng)
            if trace is not None:
                trace.write(_trace_record(state) + "\n")
            if state.sweep_count % interval == 0 and drift_below_epsilon():
                converged = True
                break

    return Prediction(
        labels=np.argmax(state.domination, axis=1),
        domination=state.domination.copy(),
        sweeps=state.sweep_count,
        converged=converged,
    )
