"""Domains, ray exit distances and collocation node sets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

BOUNDARY_TOL = 1.0e-12
MIN_NODE_DISTANCE = 1.0e-10

NODE_MODES = ("regular", "jiggled", "uniform_random", "disk_random", "disk_rings", "line")


class OutsideDomainError(ValueError):
    pass


class InfeasibleNodeCountError(RuntimeError):
    pass


def direction(theta: float) -> tuple[float, float]:
    """Unit vector (cos theta, sin theta), exact on the coordinate axes."""
    c, s = math.cos(theta), math.sin(theta)
    if abs(c) < 1.0e-15:
        c = 0.0
    if abs(s) < 1.0e-15:
        s = 0.0
    return c, s


@dataclass(frozen=True)
class Rectangle:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("rectangle needs xmax > xmin and ymax > ymin")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    @property
    def center(self) -> tuple[float, float]:
        return 0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax)

    def contains(self, pts, tol: float = BOUNDARY_TOL) -> np.ndarray:
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return (
            (x >= self.xmin - tol) & (x <= self.xmax + tol)
            & (y >= self.ymin - tol) & (y <= self.ymax + tol)
        )

    def boundary_distance(self, pts) -> np.ndarray:
        """Signed distance to the boundary, positive inside."""
        pts = np.atleast_2d(pts)
        x, y = pts[:, 0], pts[:, 1]
        return np.minimum.reduce([x - self.xmin, self.xmax - x, y - self.ymin, self.ymax - y])

    def exit_distance(self, pts, theta: float) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c, s = direction(theta)
        vx, vy = -c, -s
        out = np.full(len(pts), np.inf)
        x, y = pts[:, 0], pts[:, 1]
        if vx > 0:
            out = np.minimum(out, (self.xmax - x) / vx)
        elif vx < 0:
            out = np.minimum(out, (self.xmin - x) / vx)
        if vy > 0:
            out = np.minimum(out, (self.ymax - y) / vy)
        elif vy < 0:
            out = np.minimum(out, (self.ymin - y) / vy)
        return np.maximum(out, 0.0)

    def boundary_points(self, spacing: float) -> np.ndarray:
        """Equispaced points along the perimeter, corners included."""
        lx, ly = self.xmax - self.xmin, self.ymax - self.ymin
        nx = max(1, int(round(lx / spacing)))
        ny = max(1, int(round(ly / spacing)))
        xs = self.xmin + lx * np.arange(nx + 1) / nx
        ys = self.ymin + ly * np.arange(ny + 1) / ny
        pts = [np.column_stack([xs, np.full_like(xs, self.ymin)])]
        pts.append(np.column_stack([np.full(ny, self.xmax), ys[1:]]))
        pts.append(np.column_stack([xs[::-1][1:], np.full(nx, self.ymax)]))
        pts.append(np.column_stack([np.full(ny - 1, self.xmin), ys[::-1][1:-1]]))
        return np.vstack(pts)

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.column_stack([
            rng.uniform(self.xmin, self.xmax, n),
            rng.uniform(self.ymin, self.ymax, n),
        ])


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    @property
    def area(self) -> float:
        return math.pi * self.radius**2

    @property
    def center(self) -> tuple[float, float]:
        return self.cx, self.cy

    def contains(self, pts, tol: float = BOUNDARY_TOL) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return np.hypot(pts[:, 0] - self.cx, pts[:, 1] - self.cy) <= self.radius + tol

    def boundary_distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return self.radius - np.hypot(pts[:, 0] - self.cx, pts[:, 1] - self.cy)

    def exit_distance(self, pts, theta: float) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c, s = direction(theta)
        vx, vy = -c, -s
        px, py = pts[:, 0] - self.cx, pts[:, 1] - self.cy
        b = vx * px + vy * py
        cc = px * px + py * py - self.radius**2
        disc = np.maximum(b * b - cc, 0.0)
        return np.maximum(-b + np.sqrt(disc), 0.0)

    def boundary_points(self, spacing: float | None = None, count: int | None = None,
                        offset: float = 0.0) -> np.ndarray:
        if count is None:
            count = max(3, int(round(2.0 * math.pi * self.radius / spacing)))
        ang = offset + 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([self.cx + self.radius * np.cos(ang),
                                self.cy + self.radius * np.sin(ang)])

    def sample_uniform(self, rng: np.random.Generator, n: int) -> np.ndarray:
        r = self.radius * np.sqrt(rng.uniform(0.0, 1.0, n))
        t = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([self.cx + r * np.cos(t), self.cy + r * np.sin(t)])


Domain = Rectangle | Disk


def ray_exit_distance(domain: Domain, p, theta: float) -> float:
    """Distance from ``p`` to the boundary along ``(-cos theta, -sin theta)``."""
    p = np.asarray(p, dtype=float).reshape(1, 2)
    if not domain.contains(p)[0]:
        raise OutsideDomainError(f"point {p[0].tolist()} lies outside the domain")
    return float(domain.exit_distance(p, theta)[0])


@dataclass(frozen=True)
class NodeSet:
    interior: np.ndarray
    boundary: np.ndarray
    mode: str
    seed: int | None = None
    params: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.interior)

    @property
    def N(self) -> int:
        return len(self.boundary)

    @property
    def points(self) -> np.ndarray:
        """Interior nodes first, then boundary nodes."""
        return np.vstack([self.interior, self.boundary])

    def __len__(self) -> int:
        return self.M + self.N

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "x", "y"])
            for kind, arr in (("interior", self.interior), ("boundary", self.boundary)):
                for x, y in arr:
                    w.writerow([kind, repr(float(x)), repr(float(y))])

    @classmethod
    def from_csv(cls, path, mode: str = "file") -> "NodeSet":
        interior, boundary = [], []
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                pt = (float(row["x"]), float(row["y"]))
                (interior if row["kind"] == "interior" else boundary).append(pt)
        return cls(np.array(interior).reshape(-1, 2), np.array(boundary).reshape(-1, 2), mode)


def _lattice(domain: Domain, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(domain, Rectangle):
        nx = int(round((domain.xmax - domain.xmin) / spacing))
        ny = int(round((domain.ymax - domain.ymin) / spacing))
        xs = np.linspace(domain.xmin, domain.xmax, nx + 1)
        ys = np.linspace(domain.ymin, domain.ymax, ny + 1)
        X, Y = np.meshgrid(xs[1:-1], ys[1:-1])
        interior = np.column_stack([X.ravel(), Y.ravel()])
        return interior, domain.boundary_points(spacing)
    r = domain.radius
    k = int(math.ceil(r / spacing))
    offs = spacing * np.arange(-k, k + 1)
    X, Y = np.meshgrid(domain.cx + offs, domain.cy + offs)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    # keep lattice points at least half a spacing away from the rim
    interior = pts[domain.boundary_distance(pts) > 0.5 * spacing]
    return interior, domain.boundary_points(spacing)


def _random_interior(domain: Domain, rng, count: int, existing: np.ndarray,
                     clearance: float = 0.0) -> np.ndarray:
    accepted: list[np.ndarray] = []
    ref = existing.copy()
    attempts = 0
    while len(accepted) < count:
        attempts += 1
        if attempts > 100 * count:
            raise InfeasibleNodeCountError(
                f"could only place {len(accepted)} of {count} interior nodes"
            )
        p = domain.sample_uniform(rng, 1)
        if domain.boundary_distance(p)[0] <= max(BOUNDARY_TOL, clearance):
            continue
        if len(ref) and np.min(np.hypot(*(ref - p).T)) <= MIN_NODE_DISTANCE:
            continue
        accepted.append(p[0])
        ref = np.vstack([ref, p])
    return np.array(accepted).reshape(-1, 2)


def _split_total(domain: Domain, total: int) -> tuple[int, float]:
    # boundary count N with boundary spacing sqrt(area / M), M = total - N
    perimeter = (
        2.0 * math.pi * domain.radius if isinstance(domain, Disk)
        else 2.0 * ((domain.xmax - domain.xmin) + (domain.ymax - domain.ymin))
    )
    n_b = 4
    for _ in range(50):
        h = math.sqrt(domain.area / max(total - n_b, 1))
        new = max(4, int(round(perimeter / h)))
        if new == n_b:
            break
        n_b = new
    return total - n_b, math.sqrt(domain.area / max(total - n_b, 1))


def ring_counts(total: int, dr: float, radius: float) -> list[int]:
    """Node counts for the center point and each ring of a ring layout.

    Rings sit at radii ``dr, 2*dr, ..., radius``; the last ring is the
    boundary. Counts are proportional to circumference (floored), and the
    residual goes to the outermost ring.
    """
    n_rings = int(round(radius / dr))
    radii = dr * np.arange(1, n_rings + 1)
    share = (total - 1) * radii / radii.sum()
    counts = [1] + [int(math.floor(v)) for v in share]
    counts[-1] += total - sum(counts)
    return counts


def generate_nodes(domain: Domain, mode: str, *, spacing: float | None = None,
                   count: int | None = None, ring_dr: float | None = None,
                   jiggle: float = 0.25, clearance: float = 0.0, seed: int = 0) -> NodeSet:
    """Build a collocation node set.

    Parameters
    ----------
    mode : str
        ``regular`` / ``jiggled`` (``spacing``), ``uniform_random`` /
        ``disk_random`` (``count`` = total node count), ``disk_rings``
        (``count`` and ``ring_dr``), ``line`` (rectangle mid-line nodes for
        one-dimensional problems, ``spacing``).
    jiggle : float
        Perturbation half-width of the jiggled mode, as a fraction of
        ``spacing``.
    clearance : float
        Random modes only: minimum distance of interior nodes from the
        boundary, as a fraction of the equivalent spacing ``sqrt(area/M)``.
        Nodes hugging the rim can give the collocated operator spurious
        growing modes.
    """
    rng = np.random.default_rng(seed)
    params = {"spacing": spacing, "count": count, "ring_dr": ring_dr}

    if mode in ("regular", "jiggled"):
        if spacing is None or spacing <= 0:
            raise ValueError(f"{mode} nodes need a positive spacing")
        interior, boundary = _lattice(domain, spacing)
        if mode == "jiggled":
            if not 0 <= jiggle < 0.5:
                raise ValueError("jiggle amplitude must be below half the spacing")
            interior = interior + rng.uniform(-jiggle * spacing, jiggle * spacing, interior.shape)
            params["jiggle"] = jiggle
    elif mode == "line":
        if not isinstance(domain, Rectangle):
            raise ValueError("line nodes need a rectangle")
        n = int(round((domain.xmax - domain.xmin) / spacing))
        xs = np.linspace(domain.xmin, domain.xmax, n + 1)
        y0 = 0.5 * (domain.ymin + domain.ymax)
        interior = np.column_stack([xs[1:-1], np.full(n - 1, y0)])
        boundary = np.array([[domain.xmin, y0], [domain.xmax, y0]])
    elif mode in ("uniform_random", "disk_random"):
        if mode == "disk_random" and not isinstance(domain, Disk):
            raise ValueError("disk_random needs a disk domain")
        if count is None or count < 5:
            raise ValueError(f"{mode} needs a total count >= 5")
        m, h = _split_total(domain, count)
        boundary = domain.boundary_points(h) if isinstance(domain, Rectangle) \
            else domain.boundary_points(count=count - m)
        # rectangle perimeters round per side, so the interior takes up the slack
        m = count - len(boundary)
        if m < 1:
            raise InfeasibleNodeCountError(
                f"{len(boundary)} boundary nodes leave no room for interior nodes "
                f"in a total of {count}"
            )
        if not 0 <= clearance < 0.5:
            raise ValueError("clearance must lie in [0, 0.5)")
        interior = _random_interior(domain, rng, m, boundary, clearance * h)
        params["boundary_spacing"] = h
        params["clearance"] = clearance
    elif mode == "disk_rings":
        if not isinstance(domain, Disk):
            raise ValueError("disk_rings needs a disk domain")
        if count is None or ring_dr is None or ring_dr <= 0:
            raise ValueError("disk_rings needs count and ring_dr")
        counts = ring_counts(count, ring_dr, domain.radius)
        rings = [np.array([[domain.cx, domain.cy]])]
        n_rings = len(counts) - 1
        for k in range(1, n_rings + 1):
            r = domain.radius * k / n_rings
            m = counts[k]
            # stagger alternate rings by half an angular step
            ang = 2.0 * math.pi * (np.arange(m) + 0.5 * (k % 2)) / m
            rings.append(np.column_stack([domain.cx + r * np.cos(ang), domain.cy + r * np.sin(ang)]))
        interior = np.vstack(rings[:-1])
        boundary = rings[-1]
        params["ring_counts"] = counts
    else:
        raise ValueError(f"unknown node mode {mode!r}; expected one of {NODE_MODES}")

    return NodeSet(np.ascontiguousarray(interior, dtype=float),
                   np.ascontiguousarray(boundary, dtype=float), mode, seed, params)
