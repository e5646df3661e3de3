"""Robust random cut forest with streaming insert/forget and CoDisp scores.

A tree is stored as linked ``Branch``/``Leaf`` nodes. Branches send points
with ``x[dim] <= cut`` left and the rest right, and keep a tight bounding box
plus the number of points (with multiplicity) below them. Identical points
share one leaf whose ``n`` counts the copies.
"""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .timeseries import TimeSeries


class Leaf:
    __slots__ = ("x", "n", "parent")

    def __init__(self, x: tuple, parent=None):
        self.x = x
        self.n = 1
        self.parent = parent

    @property
    def lo(self) -> tuple:
        return self.x

    @property
    def hi(self) -> tuple:
        return self.x


class Branch:
    __slots__ = ("dim", "cut", "left", "right", "n", "lo", "hi", "parent")

    def __init__(self, dim: int, cut: float, left, right, parent=None):
        self.dim = dim
        self.cut = cut
        self.left = left
        self.right = right
        self.parent = parent
        self.n = left.n + right.n
        self.lo = tuple(map(min, left.lo, right.lo))
        self.hi = tuple(map(max, left.hi, right.hi))


class RcTree:
    """A single random cut tree over points of fixed dimension."""

    def __init__(self, dim: int, rng: np.random.Generator | None = None):
        self.dim = dim
        self.rng = rng if rng is not None else np.random.default_rng()
        self.root: Leaf | Branch | None = None
        self.leaves: dict[tuple, Leaf] = {}

    def __len__(self) -> int:
        return self.root.n if self.root is not None else 0

    def _key(self, point) -> tuple:
        if type(point) is tuple and len(point) == self.dim:
            return point
        x = tuple(float(v) for v in np.asarray(point, dtype=np.float64).reshape(-1))
        if len(x) != self.dim:
            raise ValidationError(f"point has dimension {len(x)}, tree expects {self.dim}")
        return x

    def _cut(self, lo: tuple, hi: tuple) -> tuple[int, float]:
        # dimension chosen proportionally to its side length, cut uniform within it
        span = [b - a for a, b in zip(lo, hi)]
        r = self.rng.random() * sum(span)
        for dim, s in enumerate(span):
            if r < s:
                return dim, lo[dim] + r
            r -= s
        # only reachable through rounding: fall back to the last non-degenerate side
        dim = max(d for d, s in enumerate(span) if s > 0)
        return dim, lo[dim] + span[dim] / 2

    def insert(self, point) -> Leaf:
        x = self._key(point)
        leaf = self.leaves.get(x)
        if leaf is not None:
            leaf.n += 1
            node = leaf.parent
            while node is not None:
                node.n += 1
                node = node.parent
            return leaf

        leaf = Leaf(x)
        self.leaves[x] = leaf
        if self.root is None:
            self.root = leaf
            return leaf

        node = self.root
        while True:
            blo, bhi = node.lo, node.hi
            dim, cut = self._cut(tuple(map(min, blo, x)), tuple(map(max, bhi, x)))
            if cut < blo[dim]:
                new = Branch(dim, cut, leaf, node)
                break
            if cut >= bhi[dim] and x[dim] > cut:
                new = Branch(dim, cut, node, leaf)
                break
            node = node.left if x[node.dim] <= node.cut else node.right

        parent = node.parent
        new.parent = parent
        leaf.parent = new
        node.parent = new
        if parent is None:
            self.root = new
            return leaf
        if parent.left is node:
            parent.left = new
        else:
            parent.right = new
        p = parent
        while p is not None:
            p.n += 1
            p.lo = tuple(map(min, p.lo, x))
            p.hi = tuple(map(max, p.hi, x))
            p = p.parent
        return leaf

    def forget(self, point) -> None:
        x = self._key(point)
        leaf = self.leaves.get(x)
        if leaf is None:
            raise KeyError(f"point {x} not in tree")
        if leaf.n > 1:
            leaf.n -= 1
            node = leaf.parent
            while node is not None:
                node.n -= 1
                node = node.parent
            return

        del self.leaves[x]
        parent = leaf.parent
        if parent is None:
            self.root = None
            return
        sibling = parent.right if parent.left is leaf else parent.left
        grand = parent.parent
        sibling.parent = grand
        if grand is None:
            self.root = sibling
            return
        if grand.left is parent:
            grand.left = sibling
        else:
            grand.right = sibling
        node = grand
        while node is not None:
            node.n -= 1
            node.lo = tuple(map(min, node.left.lo, node.right.lo))
            node.hi = tuple(map(max, node.left.hi, node.right.hi))
            node = node.parent

    def codisp(self, point) -> float:
        """Max over the path to the root of sibling size / path-node size."""
        x = self._key(point)
        leaf = self.leaves.get(x)
        if leaf is None:
            raise KeyError(f"point {x} not in tree")
        best = 0.0
        node = leaf
        while node.parent is not None:
            parent = node.parent
            sibling = parent.right if parent.left is node else parent.left
            best = max(best, sibling.n / node.n)
            node = parent
        return best

    def check(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        if self.root is None:
            assert not self.leaves
            return
        assert self.root.parent is None
        seen = []

        def walk(node) -> tuple[int, tuple, tuple]:
            if isinstance(node, Leaf):
                assert node.n >= 1
                assert self.leaves.get(node.x) is node
                seen.append(node.x)
                return node.n, node.x, node.x
            assert node.left.parent is node and node.right.parent is node
            nl, llo, lhi = walk(node.left)
            nr, rlo, rhi = walk(node.right)
            assert lhi[node.dim] <= node.cut < rlo[node.dim], "cut-side violation"
            assert node.n == nl + nr, "count mismatch"
            lo, hi = tuple(map(min, llo, rlo)), tuple(map(max, lhi, rhi))
            assert node.lo == lo and node.hi == hi, "bounding box not tight"
            return node.n, lo, hi

        walk(self.root)
        assert len(seen) == len(self.leaves)


@dataclass(frozen=True)
class ForestConfig:
    num_trees: int = 40
    tree_capacity: int = 256
    shingle: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValidationError("num_trees must be >= 1")
        if self.tree_capacity < 1:
            raise ValidationError("tree_capacity must be >= 1")
        if self.shingle < 1:
            raise ValidationError("shingle must be >= 1")


class Forest:
    """Trees over a sliding window of shingled points with FIFO eviction."""

    def __init__(self, config: ForestConfig = ForestConfig()):
        self.config = config
        seeds = np.random.SeedSequence(config.seed).spawn(config.num_trees)
        self.trees = [
            RcTree(config.shingle, np.random.Generator(np.random.PCG64(s))) for s in seeds
        ]
        self.window: deque[tuple] = deque()

    def update(self, point) -> float:
        """Insert ``point`` (evicting the oldest if full) and return its mean CoDisp."""
        point = tuple(float(v) for v in np.asarray(point, dtype=np.float64).reshape(-1))
        if len(self.window) >= self.config.tree_capacity:
            old = self.window.popleft()
            for t in self.trees:
                t.forget(old)
        self.window.append(point)
        total = 0.0
        for t in self.trees:
            t.insert(point)
            total += t.codisp(point)
        return total / len(self.trees)

    def score(self, point) -> float:
        return float(np.mean([t.codisp(point) for t in self.trees]))


@dataclass(frozen=True, eq=False)
class StreamScores:
    #: stream index of the newest sample in each shingle
    index: np.ndarray
    score: np.ndarray


def score_stream(series: TimeSeries | np.ndarray, config: ForestConfig = ForestConfig()) -> StreamScores:
    values = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=np.float64)
    s = config.shingle
    if len(values) < s:
        raise ValidationError(f"series length {len(values)} shorter than shingle {s}")
    forest = Forest(config)
    shingles = np.lib.stride_tricks.sliding_window_view(values, s)
    scores = np.array([forest.update(p) for p in shingles])
    return StreamScores(np.arange(s - 1, len(values)), scores)


def find_events(scores: StreamScores, threshold: float, merge_gap: int = 0) -> list[tuple[int, int]]:
    """Group indices scoring above ``threshold`` into inclusive (start, end) runs.

    Runs separated by at most ``merge_gap`` indices are merged.
    """
    above = scores.index[scores.score > threshold].tolist()
    events: list[list[int]] = []
    for i in above:
        if events and i - events[-1][1] <= merge_gap + 1:
            events[-1][1] = i
        else:
            events.append([i, i])
    return [tuple(e) for e in events]


@dataclass(frozen=True)
class PeakReport:
    true_events: list
    processed_events: list
    missed: list
    false_positives: list

    @property
    def preserved(self) -> bool:
        return not self.missed and not self.false_positives


def compare_peaks(
    true_scores: StreamScores, processed_scores: StreamScores, threshold: float, tolerance: int
) -> PeakReport:
    """Match anomaly events between two score traces.

    Events closer than ``tolerance`` indices are merged, and a true event
    counts as detected when some processed event lies within ``tolerance``
    of it. Unmatched processed events are false positives.
    """
    te = find_events(true_scores, threshold, tolerance)
    pe = find_events(processed_scores, threshold, tolerance)

    def near(a, b):
        return a[0] - tolerance <= b[1] and b[0] - tolerance <= a[1]

    missed = [e for e in te if not any(near(e, p) for p in pe)]
    false_pos = [p for p in pe if not any(near(p, e) for e in te)]
    return PeakReport(te, pe, missed, false_pos)


def scores_csv(true_scores: StreamScores, processed_scores: StreamScores) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "score_true", "score_processed"])
    for i, a, b in zip(true_scores.index, true_scores.score, processed_scores.score):
        w.writerow([int(i), repr(float(a)), repr(float(b))])
    return buf.getvalue()
