"""3D network topology: random SBS deployment, UAV placement and association,
and the angular/distance quantities feeding the interference terms.

One global Cartesian frame is used throughout; per-link UAV-centered angle
pairs are derived on demand.  A topology is immutable after construction.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AnglePair",
    "DeploymentSpec",
    "Topology",
    "deploy_random",
    "deploy_model",
    "pointing_angles",
    "spatial_angle",
    "inter_cell_geometry",
]

TOPOLOGY_FORMAT_VERSION = 1


@dataclass(frozen=True)
class AnglePair:
    """Per-axis pointing angles (x-z and y-z planes) of a ground point seen
    from a UAV, radians."""

    theta_x: float
    theta_y: float


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class DeploymentSpec:
    n_sbs: int = 100
    n_uav: int = 10
    area_radius: float = 1500.0
    uav_height_range: tuple[float, float] = (50.0, 100.0)
    per_uav_links: int = 10
    coverage_radius: float = 400.0

    def __post_init__(self):
        if self.n_sbs < self.n_uav * self.per_uav_links:
            raise ConfigurationError(
                f"{self.n_sbs} SBSs cannot fill {self.n_uav} cells of {self.per_uav_links}")
        if self.area_radius <= 0 or self.coverage_radius <= 0:
            raise ConfigurationError("radii must be positive")
        lo, hi = self.uav_height_range
        if not (0 < lo <= hi):
            raise ConfigurationError("UAV heights must be positive and ordered")


@dataclass(frozen=True)
class Topology:
    """UAV and SBS positions plus the SBS -> UAV association map.

    ``uav_xyz`` is (I, 3) with columns x, y, h; ``sbs_xy`` is (n_sbs, 2)
    on the ground plane; ``assoc[s]`` is the serving UAV index of SBS s.
    """

    uav_xyz: np.ndarray
    sbs_xy: np.ndarray
    assoc: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "uav_xyz", np.asarray(self.uav_xyz, dtype=float))
        object.__setattr__(self, "sbs_xy", np.asarray(self.sbs_xy, dtype=float))
        object.__setattr__(self, "assoc", np.asarray(self.assoc, dtype=int))
        self.uav_xyz.setflags(write=False)
        self.sbs_xy.setflags(write=False)
        self.assoc.setflags(write=False)
        if np.any(self.uav_xyz[:, 2] <= 0):
            raise ConfigurationError("every UAV needs positive height")
        if self.assoc.shape[0] != self.sbs_xy.shape[0]:
            raise ConfigurationError("association map must cover every SBS")

    @property
    def n_uav(self) -> int:
        return self.uav_xyz.shape[0]

    @property
    def n_sbs(self) -> int:
        return self.sbs_xy.shape[0]

    def cell_members(self, uav: int) -> np.ndarray:
        return np.nonzero(self.assoc == uav)[0]

    def link_pointing(self, uav: int, sbs: int) -> AnglePair:
        ux, uy, h = self.uav_xyz[uav]
        sx, sy = self.sbs_xy[sbs]
        return pointing_angles((ux, uy, h), (sx, sy))

    # --- flat CSV serialization -------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# uavfronthaul-topology v{TOPOLOGY_FORMAT_VERSION}\n")
        buf.write("kind,id,x,y,z,assoc\n")
        for i, (x, y, h) in enumerate(self.uav_xyz):
            buf.write(f"uav,{i},{float(x)!r},{float(y)!r},{float(h)!r},-1\n")
        for s, (x, y) in enumerate(self.sbs_xy):
            buf.write(f"sbs,{s},{float(x)!r},{float(y)!r},0.0,{self.assoc[s]}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Topology":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("# uavfronthaul-topology"):
            raise ConfigurationError("missing topology header line")
        uavs, sbss, assoc = {}, {}, {}
        for ln in lines[2:]:
            kind, ident, x, y, z, a = ln.split(",")
            if kind == "uav":
                uavs[int(ident)] = (float(x), float(y), float(z))
            else:
                sbss[int(ident)] = (float(x), float(y))
                assoc[int(ident)] = int(a)
        uav_xyz = np.array([uavs[i] for i in sorted(uavs)])
        sbs_xy = np.array([sbss[i] for i in sorted(sbss)])
        amap = np.array([assoc[i] for i in sorted(sbss)])
        return cls(uav_xyz, sbs_xy, amap)


def pointing_angles(uav, sbs) -> AnglePair:
    """Per-axis angles of a ground point from a UAV: x = h tan(theta_x)."""
    ux, uy, h = uav
    if h <= 0:
        raise ValueError("UAV height must be positive")
    sx, sy = sbs
    return AnglePair(math.atan((sx - ux) / h), math.atan((sy - uy) / h))


def spatial_angle(a: AnglePair, b: AnglePair) -> float:
    """Composite angle between two pointing directions:
    atan(sqrt(tan^2(dx) + tan^2(dy)))."""
    dx = a.theta_x - b.theta_x
    dy = a.theta_y - b.theta_y
    if abs(dx) >= math.pi / 2 or abs(dy) >= math.pi / 2:
        raise ValueError("per-axis angle difference must lie in (-pi/2, pi/2)")
    return math.atan(math.hypot(math.tan(dx), math.tan(dy)))


@dataclass(frozen=True)
class InterCellGeometry:
    """Distance and bearings of a target SBS as seen from a non-serving UAV."""

    distance: float
    bearing: AnglePair
    elevation: float


def inter_cell_geometry(topology: Topology, uav: int, sbs: int) -> InterCellGeometry:
    """Geometry of SBS ``sbs`` relative to interfering UAV ``uav``.

    Everything is computed from raw Cartesian coordinates; the bearing is the
    same downward-axis convention as ``pointing_angles`` so that differencing
    it against a link's pointing angles gives the interferer deviation.
    """
    if topology.assoc[sbs] == uav:
        raise ValueError("inter-cell geometry requires a non-serving UAV")
    ux, uy, h = topology.uav_xyz[uav]
    sx, sy = topology.sbs_xy[sbs]
    dx, dy = sx - ux, sy - uy
    horiz = math.hypot(dx, dy)
    distance = math.sqrt(horiz * horiz + h * h)
    elevation = math.pi / 2 if horiz == 0 else math.atan(h / horiz)
    return InterCellGeometry(distance, pointing_angles((ux, uy, h), (sx, sy)), elevation)


def _uniform_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    phi = 2.0 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def _kmeans_centroids(rng: np.random.Generator, pts: np.ndarray, k: int,
                      iters: int = 50) -> np.ndarray:
    # Deterministic k-means++-style seeding followed by Lloyd iterations.
    centers = pts[rng.choice(pts.shape[0], size=1)]
    for _ in range(1, k):
        d2 = np.min(((pts[:, None, :] - centers[None]) ** 2).sum(-1), axis=1)
        probs = d2 / d2.sum()
        centers = np.vstack([centers, pts[rng.choice(pts.shape[0], p=probs)]])
    for _ in range(iters):
        d2 = ((pts[:, None, :] - centers[None]) ** 2).sum(-1)
        labels = np.argmin(d2, axis=1)
        new = centers.copy()
        for j in range(k):
            members = pts[labels == j]
            if members.size:
                new[j] = members.mean(axis=0)
        if np.allclose(new, centers):
            centers = new
            break
        centers = new
    return centers


def deploy_random(spec: DeploymentSpec, seed: int) -> Topology:
    """Random deployment: SBSs i.i.d. uniform on the disk, UAVs at SBS-cluster
    centroids, greedy nearest-J association with each SBS claimed once.

    Deterministic given ``seed``.
    """
    rng = np.random.default_rng(np.random.Philox(key=seed))
    sbs_xy = _uniform_disk(rng, spec.n_sbs, spec.area_radius)
    centers = _kmeans_centroids(rng, sbs_xy, spec.n_uav)
    lo, hi = spec.uav_height_range
    heights = lo + (hi - lo) * rng.random(spec.n_uav)
    uav_xyz = np.column_stack([centers, heights])

    assoc = np.full(spec.n_sbs, -1, dtype=int)
    for i in range(spec.n_uav):
        free = np.nonzero(assoc < 0)[0]
        d = np.hypot(sbs_xy[free, 0] - centers[i, 0], sbs_xy[free, 1] - centers[i, 1])
        take = free[np.argsort(d, kind="stable")[: spec.per_uav_links]]
        assoc[take] = i
    # Leftover SBSs (n_sbs > I*J) attach to their nearest UAV but are not
    # fronthaul-served; keep them associated for completeness.
    left = np.nonzero(assoc < 0)[0]
    if left.size:
        d = ((sbs_xy[left, None, :] - centers[None]) ** 2).sum(-1)
        assoc[left] = np.argmin(d, axis=1)
    return Topology(uav_xyz, sbs_xy, assoc)


def _chord_offsets(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """Ground offsets with the x-abscissa uniform on [-R, R] and the
    y-coordinate uniform on the disk chord at that abscissa.

    This is the per-axis position law whose induced pointing-angle and
    separation-angle distributions the analytic chain integrates against.
    """
    x = radius * (2.0 * rng.random(n) - 1.0)
    y = np.sqrt(radius * radius - x * x) * (2.0 * rng.random(n) - 1.0)
    return np.column_stack([x, y])


def deploy_model(spec: DeploymentSpec, seed: int) -> Topology:
    """Coverage-disk deployment matching the analytic position model.

    The target UAV sits above the origin; its target SBS lies on the +x axis
    at a ground distance uniform on [0, R], and every other served SBS is
    drawn with the chord model within the coverage radius of its UAV's nadir.
    Interfering UAVs are uniform over the area disk.  Exactly I*J SBSs are
    generated, ordered cell by cell with the target SBS first.
    """
    rng = np.random.default_rng(np.random.Philox(key=(seed, 1)))
    lo, hi = spec.uav_height_range
    heights = lo + (hi - lo) * rng.random(spec.n_uav)
    centers = np.vstack([[0.0, 0.0],
                         _uniform_disk(rng, spec.n_uav - 1, spec.area_radius)])
    uav_xyz = np.column_stack([centers, heights])

    R, J = spec.coverage_radius, spec.per_uav_links
    cells = []
    target = np.array([[R * rng.random(), 0.0]])
    cells.append(np.vstack([target, _chord_offsets(rng, J - 1, R)]) + centers[0])
    for i in range(1, spec.n_uav):
        cells.append(_chord_offsets(rng, J, R) + centers[i])
    sbs_xy = np.vstack(cells)
    assoc = np.repeat(np.arange(spec.n_uav), J)
    return Topology(uav_xyz, sbs_xy, assoc)
