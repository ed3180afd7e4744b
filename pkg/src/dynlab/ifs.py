"""Iterated function systems: orbit exploration on an occupancy grid.

An IFS is a finite list of generators sharing a state space. A word is a
tuple of generator indices; the first symbol is applied first, so the word
(s1, ..., sk) evaluates g_sk o ... o g_s1. Orbits are explored breadth first
and deduplicated on a resolution-eps occupancy grid; every stored cell keeps
a witness word that replays to its representative point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoMetadata
from .fixed_points import FixedPointRecord, find_fixed_point
from .maps import SmoothMap
from .spaces import Box, StateSpace

Word = tuple[int, ...]


def apply_word(generators: list[SmoothMap], word: Word, x) -> np.ndarray:
    """Evaluate the word, first symbol first."""
    y = np.asarray(x, dtype=float)
    for s in word:
        y = generators[s](y)
    return y


@dataclass
class IFS:
    generators: list[SmoothMap]
    domain_region: Box
    fixed_points: list[FixedPointRecord] | None = None
    info: dict = field(default_factory=dict)  # construction metadata

    def __post_init__(self):
        if not self.generators:
            raise ValueError("IFS needs at least one generator")
        space = self.generators[0].domain
        for g in self.generators:
            if g.domain is not space and g.domain.factors != space.factors:
                raise ValueError("generators must share a state space")

    @property
    def space(self) -> StateSpace:
        return self.generators[0].domain

    @property
    def k(self) -> int:
        return len(self.generators)

    def contraction_bounds(self) -> tuple[float, float]:
        """(lam, lip) uniform over generators; NoMetadata if any is missing."""
        lams = [g.lam for g in self.generators]
        lips = [g.lip for g in self.generators]
        if any(v is None for v in lams) or any(v is None for v in lips):
            raise NoMetadata("generators lack lam/lip contraction metadata")
        return min(lams), max(lips)

    def compute_fixed_points(self, tol: float = 1e-12) -> list[FixedPointRecord]:
        if self.fixed_points is None:
            self.fixed_points = [
                find_fixed_point(g, self.domain_region.center, tol=tol)
                for g in self.generators
            ]
        return self.fixed_points

    def fixed_point_array(self) -> np.ndarray:
        return np.array([r.point for r in self.compute_fixed_points()])

    def apply_word(self, word: Word, x) -> np.ndarray:
        return apply_word(self.generators, word, x)


@dataclass
class ReachSet:
    """Occupancy grid of an orbit exploration.

    grid maps a cell key to (witness word, representative point). The witness
    word applied to the seed reproduces the representative exactly (the
    representative is stored at insertion time). The final frontier is kept
    so an exploration can resume at greater depth.
    """

    space: StateSpace
    eps: float
    seed: np.ndarray
    grid: dict[tuple, tuple[Word, np.ndarray]] = field(default_factory=dict)
    visited_count: int = 0
    truncated: bool = False
    depth_reached: int = 0
    frontier: list[tuple[Word, np.ndarray]] = field(default_factory=list)

    def cells(self) -> set[tuple]:
        return set(self.grid.keys())

    def points(self) -> np.ndarray:
        return np.array([rep for _, rep in self.grid.values()])

    def coverage(self) -> float:
        return len(self.grid) / self.space.total_cells(self.eps)

    def key_of(self, x) -> tuple:
        return tuple(int(v) for v in self.space.cell_index(np.asarray(x, float), self.eps))


def forward_orbit(
    ifs: IFS,
    seed,
    depth: int,
    eps: float,
    budget: int = 1_000_000,
) -> ReachSet:
    """Breadth-first orbit of the seed, deduplicated by eps-cells.

    Explores all words up to the given depth, except that a point landing in
    an already-occupied cell is not expanded again. Deterministic given
    inputs: the frontier preserves insertion order and generators apply in
    index order. When the cell-visit budget runs out the partial set is
    returned with truncated=True.
    """
    space = ifs.space
    seed = space.canonicalize(np.asarray(seed, dtype=float))
    reach = ReachSet(space=space, eps=eps, seed=seed)
    key0 = reach.key_of(seed)
    reach.grid[key0] = ((), seed)
    reach.visited_count = 1
    reach.frontier = [((), seed)]
    return extend_orbit(ifs, reach, depth, budget)


def extend_orbit(ifs: IFS, reach: ReachSet, extra_depth: int, budget: int = 1_000_000) -> ReachSet:
    """Continue a breadth-first exploration from its stored frontier."""
    space = ifs.space
    eps = reach.eps
    frontier = reach.frontier
    for level in range(reach.depth_reached + 1, reach.depth_reached + extra_depth + 1):
        if not frontier:
            break
        nxt: list[tuple[Word, np.ndarray]] = []
        pts = np.array([p for _, p in frontier])
        for gi, g in enumerate(ifs.generators):
            if reach.truncated:
                break
            images = g(pts)
            keys = space.cell_index(images, eps)
            for (word, _), img, key in zip(frontier, images, keys, strict=True):
                if reach.visited_count >= budget:
                    reach.truncated = True
                    break
                reach.visited_count += 1
                k = tuple(int(v) for v in key)
                if k not in reach.grid:
                    w = word + (gi,)
                    reach.grid[k] = (w, img)
                    nxt.append((w, img))
        reach.depth_reached = level
        frontier = nxt
        if reach.truncated:
            break
    reach.frontier = frontier
    return reach


def replay_check(ifs: IFS, reach: ReachSet, tol: float | None = None) -> bool:
    """Every witness word, applied to the seed, lands within eps/2 of its
    representative (exact up to float noise for deterministic generators)."""
    tol = reach.eps / 2.0 if tol is None else tol
    for word, rep in reach.grid.values():
        got = ifs.apply_word(word, reach.seed)
        if ifs.space.distance(got, rep) > tol:
            return False
    return True


def coarsen_cells(reach: ReachSet, eps: float) -> set[tuple]:
    """Occupied eps-cells implied by a finer exploration."""
    keys = set()
    for _, rep in reach.grid.values():
        keys.add(tuple(int(v) for v in reach.space.cell_index(rep, eps)))
    return keys


def minimality_experiment(
    ifs: IFS,
    seed_grid,
    eps: float,
    budget: int = 1_000_000,
    depth: int | None = None,
    refine: int = 4,
) -> dict:
    """Fraction of eps-cells of the whole space reached from each seed.

    Exploration runs at resolution eps/refine (one representative per fine
    cell undercounts the reachable coarse cells otherwise) and coverage is
    reported on the eps-grid. The space must be compact.
    """
    seeds = np.atleast_2d(np.asarray(seed_grid, dtype=float))
    depth = depth if depth is not None else budget  # budget is the real limit
    total = ifs.space.total_cells(eps)
    per_seed = []
    reaches = []
    for s in seeds:
        r = forward_orbit(ifs, s, depth=depth, eps=eps / refine, budget=budget)
        per_seed.append(len(coarsen_cells(r, eps)) / total)
        reaches.append(r)
    return {
        "per_seed_coverage": per_seed,
        "min_coverage": min(per_seed),
        "total_cells": total,
        "truncated": any(r.truncated for r in reaches),
        "reaches": reaches,
    }


def recurrence_experiment(
    m: SmoothMap,
    samples,
    eps: float,
    horizon: int,
) -> dict:
    """Fraction of samples returning within eps of themselves, both time
    directions, within the horizon."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    space = m.domain

    def recurrent(direction_map: SmoothMap) -> np.ndarray:
        ok = np.zeros(len(samples), dtype=bool)
        x = samples.copy()
        for _ in range(horizon):
            x = direction_map(x)
            d = space.distance(x, samples)
            ok |= np.asarray(d) < eps
            if ok.all():
                break
        return ok

    fwd = recurrent(m)
    has_inverse = m.inverse is not None
    bwd = recurrent(m.inverse) if has_inverse else fwd
    both = fwd & bwd
    return {
        "recurrent_fraction": float(np.mean(both)),
        "forward_fraction": float(np.mean(fwd)),
        "backward_fraction": float(np.mean(bwd)) if has_inverse else None,
        "both_directions": has_inverse,
        "n_samples": len(samples),
    }
