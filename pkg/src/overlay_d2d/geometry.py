"""Poisson fields, the conditioned typical D2D link, and nearest-AP cells.

Points are stored as ``(n, 2)`` float arrays.  The typical D2D receiver sits
at the origin, which is also the centre of the circular observation window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import rng as rngmod
from .errors import ParameterError

DEFAULT_EXPECTED_APS = 30.0
MAX_RESAMPLE_ATTEMPTS = 64


class Point2(NamedTuple):
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


ORIGIN = Point2(0.0, 0.0)


@dataclass(frozen=True)
class SimWindow:
    radius: float
    center: Point2 = ORIGIN

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise ParameterError(f"window radius must be positive and finite, got {self.radius}")

    @classmethod
    def for_expected_count(cls, density: float, expected: float = DEFAULT_EXPECTED_APS) -> "SimWindow":
        """Disc around the origin holding ``expected`` points of ``density`` on average."""
        if density <= 0:
            raise ParameterError(f"density must be positive, got {density}")
        return cls(radius=math.sqrt(expected / (math.pi * density)))

    @property
    def area(self) -> float:
        return math.pi * self.radius**2


@dataclass(frozen=True)
class PppConfig:
    lambda_a: float
    lambda_d: float
    r_d: float
    window: SimWindow | None = None
    seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if not self.lambda_a > 0:
            raise ParameterError(f"lambda_a must be positive, got {self.lambda_a}")
        if not self.lambda_d > 0:
            raise ParameterError(f"lambda_d must be positive, got {self.lambda_d}")
        if not (self.r_d >= 0 and math.isfinite(self.r_d)):
            raise ParameterError(f"r_d must be finite and non-negative, got {self.r_d}")
        if self.window is None:
            object.__setattr__(self, "window", SimWindow.for_expected_count(self.lambda_a))
        if self.seed < 0 or self.trial_index < 0:
            raise ParameterError("seed and trial_index must be unsigned")


def sample_ppp(density: float, window: SimWindow, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP restricted to ``window``; returns an ``(n, 2)`` array.

    The count is Poisson with mean density * area; locations are drawn by
    rejection from the bounding square, which avoids trigonometry.
    """
    if not density > 0:
        raise ParameterError(f"density must be positive, got {density}")
    n = int(rng.poisson(density * window.area))
    pts = np.empty((0, 2))
    while len(pts) < n:
        need = n - len(pts)
        cand = rng.random((int(need * 1.3) + 8, 2))
        cand *= 2.0
        cand -= 1.0
        cand = cand[np.einsum("ij,ij->i", cand, cand) <= 1.0][:need]
        pts = np.concatenate((pts, cand)) if len(pts) else cand
    pts *= window.radius
    if window.center != ORIGIN:
        pts += np.array(window.center)
    return pts


def nearest_index(points: np.ndarray, aps: np.ndarray, chunk: int | None = None) -> np.ndarray:
    """Index of the nearest AP for each point; ties go to the lowest index."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    # argmin_j |a_j|^2 - 2 p.a_j, which drops the per-point |p|^2 term;
    # one in-place score block of ~256 kB at a time keeps allocation cheap
    aa = np.einsum("ij,ij->i", aps, aps)
    m2 = -2.0 * aps.T
    if chunk is None:
        chunk = max(64, 32768 // max(len(aps), 1))
    out = np.empty(len(points), dtype=np.intp)
    for s in range(0, len(points), chunk):
        score = points[s : s + chunk] @ m2
        score += aa
        out[s : s + chunk] = score.argmin(axis=1)
    return out


def _nearest_one(p: Point2, aps: np.ndarray) -> int:
    return int(np.argmin((aps[:, 0] - p[0]) ** 2 + (aps[:, 1] - p[1]) ** 2))


@dataclass(frozen=True)
class NetworkRealization:
    aps: np.ndarray
    d2d_txs: np.ndarray  # excludes the typical TX
    typical_tx: Point2
    window: SimWindow
    r_d: float
    link_angle: float = 0.0
    typical_rx: Point2 = ORIGIN
    attempts: int = field(default=1, compare=False)

    @cached_property
    def cell_of_tx(self) -> np.ndarray:
        return nearest_index(self.d2d_txs, self.aps)

    @cached_property
    def cell_of_typical_tx(self) -> int:
        return _nearest_one(self.typical_tx, self.aps)

    @cached_property
    def cell_of_typical_rx(self) -> int:
        return _nearest_one(self.typical_rx, self.aps)

    @property
    def r_a(self) -> float:
        a = self.aps[self.cell_of_typical_rx]
        return math.hypot(a[0] - self.typical_rx.x, a[1] - self.typical_rx.y)

    def with_link_distance(self, r_d: float) -> "NetworkRealization":
        """Same fields and link direction, typical TX moved to distance ``r_d``.

        Cached membership of the non-typical TXs carries over.
        """
        typical = Point2(r_d * math.cos(self.link_angle), r_d * math.sin(self.link_angle))
        moved = NetworkRealization(
            self.aps, self.d2d_txs, typical, self.window, r_d, self.link_angle, self.typical_rx, self.attempts
        )
        for name in ("cell_of_tx", "cell_of_typical_rx"):
            if name in self.__dict__:
                moved.__dict__[name] = self.__dict__[name]
        return moved

    def in_cell(self, tx_indices: np.ndarray, cell_index: int, screen: int = 12) -> np.ndarray:
        """Mask of the given non-typical TXs whose nearest AP is ``cell_index``.

        Without cached membership, points that have one of the ``screen``
        APs nearest to ``cell_index`` strictly closer are rejected first;
        only the survivors get a full nearest-AP search.
        """
        if "cell_of_tx" in self.__dict__:
            return self.cell_of_tx[tx_indices] == cell_index
        pts = self.d2d_txs[tx_indices]
        aps = self.aps
        c = aps[cell_index]
        dc = np.hypot(aps[:, 0] - c[0], aps[:, 1] - c[1])
        rivals = np.argsort(dc, kind="stable")[1 : screen + 1]
        d_own = (pts[:, 0] - c[0]) ** 2 + (pts[:, 1] - c[1]) ** 2
        d_riv = (pts[:, None, 0] - aps[None, rivals, 0]) ** 2 + (pts[:, None, 1] - aps[None, rivals, 1]) ** 2
        maybe = np.flatnonzero(~(d_riv < d_own[:, None]).any(axis=1))
        mask = np.zeros(len(pts), dtype=bool)
        if len(maybe):
            mask[maybe] = nearest_index(pts[maybe], aps) == cell_index
        return mask


def sample_network(config: PppConfig, streams: rngmod.StreamPool | None = None) -> NetworkRealization:
    """Draw APs and D2D TXs, then add the typical TX at distance ``r_d``.

    Adding the point leaves the rest of the D2D field untouched, which is
    exactly the Palm distribution of a PPP seen from one of its points.
    A draw with no AP in the window is replaced by the next attempt of the
    same trial.
    """
    window = config.window
    for attempt in range(MAX_RESAMPLE_ATTEMPTS):
        if streams is not None:
            gen = streams.get(config.trial_index, rngmod.GEOMETRY, attempt)
        else:
            gen = rngmod.substream(config.seed, config.trial_index, rngmod.GEOMETRY, attempt)
        aps = sample_ppp(config.lambda_a, window, gen)
        txs = sample_ppp(config.lambda_d, window, gen)
        phi = 2.0 * np.pi * gen.random()
        if len(aps) == 0:
            continue
        typical = Point2(config.r_d * math.cos(phi), config.r_d * math.sin(phi))
        return NetworkRealization(
            aps=aps,
            d2d_txs=txs,
            typical_tx=typical,
            window=window,
            r_d=config.r_d,
            link_angle=phi,
            attempts=attempt + 1,
        )
    raise ParameterError(
        f"no AP sampled in {MAX_RESAMPLE_ATTEMPTS} attempts; window radius {window.radius} is too small"
    )


def count_in_cell(realization: NetworkRealization, cell_index: int) -> int:
    """Non-typical D2D TXs whose nearest AP is ``cell_index``."""
    if not 0 <= cell_index < len(realization.aps):
        raise IndexError(f"cell index {cell_index} out of range for {len(realization.aps)} APs")
    return int(np.count_nonzero(realization.cell_of_tx == cell_index))


def cell_area(realization: NetworkRealization, cell_index: int, n_boundary: int = 1024) -> float:
    """Area of one Voronoi cell clipped to the observation window.

    The cell is built by clipping a bounding square with the bisector
    half-plane of every competing AP, nearest first, stopping once no
    remaining AP can cut the polygon.  Cells that reach the window edge are
    rebuilt from a regular ``n_boundary``-gon approximating the window disc.
    """
    w = realization.window
    h = w.radius
    square = np.array([[-h, -h], [h, -h], [h, h], [-h, h]]) + np.array([w.center.x, w.center.y])
    poly = _voronoi_clip(realization.aps, cell_index, square)
    r = np.hypot(poly[:, 0] - w.center.x, poly[:, 1] - w.center.y)
    if len(poly) and r.max() > w.radius:
        ang = np.linspace(0.0, 2.0 * np.pi, n_boundary, endpoint=False)
        disc = np.column_stack((w.center.x + h * np.cos(ang), w.center.y + h * np.sin(ang)))
        poly = _voronoi_clip(realization.aps, cell_index, disc)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _voronoi_clip(aps: np.ndarray, cell_index: int, poly: np.ndarray) -> np.ndarray:
    c = aps[cell_index]
    others = np.delete(np.arange(len(aps)), cell_index)
    dist = np.hypot(aps[others, 0] - c[0], aps[others, 1] - c[1])
    order = np.argsort(dist, kind="stable")
    for j, d in zip(others[order], dist[order]):
        reach = np.max(np.hypot(poly[:, 0] - c[0], poly[:, 1] - c[1]))
        if d > 2.0 * reach:
            break
        a = aps[j]
        poly = _clip_halfplane(poly, a - c, 0.5 * (a + c))
        if len(poly) < 3:
            return poly[:0]
    return poly


def _clip_halfplane(poly: np.ndarray, normal: np.ndarray, through: np.ndarray) -> np.ndarray:
    # keep {x : (x - through) . normal <= 0}; poly is convex, so the kept
    # vertices form one cyclic run bounded by exactly two crossing edges
    s = (poly - through) @ normal
    inside = s <= 0
    if inside.all():
        return poly
    if not inside.any():
        return poly[:0]
    n = len(poly)
    nxt = np.roll(inside, -1)
    last_in = int(np.flatnonzero(inside & ~nxt)[0])  # edge last_in -> last_in+1 leaves
    first_in = (int(np.flatnonzero(~inside & nxt)[0]) + 1) % n  # edge first_in-1 -> first_in enters
    run = np.arange(first_in, first_in + ((last_in - first_in) % n) + 1) % n

    def cut(i):
        j = (i + 1) % n
        t = s[i] / (s[i] - s[j])
        return poly[i] + t * (poly[j] - poly[i])

    return np.vstack((poly[run], cut(last_in), cut((first_in - 1) % n)))
