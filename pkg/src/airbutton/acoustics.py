"""Steady-state acoustic field of the phased arrays above the reflecting plate.

The rigid plate is handled with image sources: the field above the plate is
the free-space field of the physical elements plus their mirror images scaled
by the plate reflection coefficient. Focusing through the plate targets the
mirror image of the desired point, so the reflected contributions align at the
real focus. The radiation force on the fingertip proxy integrates the squared
pressure amplitude over a disc, with extra image generations bouncing between
the rigid disc underside and the plate to capture the bar-plate standing wave.

Conventions: time factor exp(i*(w*t - k*r)); a focusing phase of +k*d mod 2pi
therefore makes element contributions sum constructively at distance d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import j1, roots_legendre

from .geometry import ReflectingPlane, Scene

TWO_PI = 2.0 * np.pi

# Evaluation is chunked over field points; each point's sum over sources runs
# in a single pairwise np.sum, so results do not depend on the chunk size.
_POINT_CHUNK = 2048

# Guard for image-source explosion when bouncing between disc and plate.
MAX_IMAGE_SOURCES = 2_000_000

DEFAULT_BOUNCE_ORDER = 3
QUAD_RADIAL = 16
QUAD_ANGULAR = 32


def wavelength(frequency: float, sound_speed: float) -> float:
    """Carrier wavelength c/f in meters."""
    if frequency <= 0 or sound_speed <= 0:
        raise ValueError("frequency and sound_speed must be positive")
    return sound_speed / frequency


def wavenumber(scene: Scene) -> float:
    return TWO_PI / wavelength(scene.frequency, scene.sound_speed)


def mirror_point(plane: ReflectingPlane, p) -> np.ndarray:
    """Mirror image of p across the plane; an involution."""
    p = np.asarray(p, dtype=float)
    d = (p - plane.point) @ plane.normal
    return p - 2.0 * np.multiply.outer(d, plane.normal)


@dataclass(frozen=True)
class DriveState:
    """Per-element carrier phases (rad, wrapped to [0, 2pi)) and amplitudes [0, 1]."""

    phases: np.ndarray
    amplitudes: np.ndarray
    source_pressure: float

    def __post_init__(self):
        phases = np.mod(np.asarray(self.phases, dtype=float), TWO_PI)
        amps = np.asarray(self.amplitudes, dtype=float)
        if phases.ndim != 1 or amps.shape != phases.shape:
            raise ValueError("phases and amplitudes must be 1-D arrays of equal length")
        if np.any(amps < 0) or np.any(amps > 1):
            raise ValueError("amplitudes must lie in [0, 1]")
        if self.source_pressure <= 0:
            raise ValueError("source_pressure must be positive")
        phases.flags.writeable = False
        amps.flags.writeable = False
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "amplitudes", amps)

    def scaled(self, factor: float) -> "DriveState":
        return DriveState(self.phases, self.amplitudes * factor, self.source_pressure)


@dataclass(frozen=True)
class FocusSpec:
    """Desired real focal point; via_reflection focuses through the plate."""

    target: np.ndarray
    via_reflection: bool = True

    def __post_init__(self):
        t = np.asarray(self.target, dtype=float)
        if t.shape != (3,):
            raise ValueError("target must be a 3-vector")
        t.flags.writeable = False
        object.__setattr__(self, "target", t)


@dataclass(frozen=True)
class DiscTarget:
    """Rigid disc proxy for the fingertip pad (10 mm bar -> radius 5 mm)."""

    center: np.ndarray
    radius: float
    normal: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        n = np.asarray(self.normal, dtype=float)
        if c.shape != (3,) or n.shape != (3,):
            raise ValueError("center and normal must be 3-vectors")
        if self.radius <= 0:
            raise ValueError("disc radius must be positive")
        nn = float(np.linalg.norm(n))
        if abs(nn - 1.0) > 1e-12:
            raise ValueError("disc normal must be a unit vector")
        c.flags.writeable = False
        n.flags.writeable = False
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned (by default) regular grid of evaluation points."""

    origin: np.ndarray
    shape: tuple[int, int, int]
    spacing: float
    axes: np.ndarray | None = None

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float)
        if o.shape != (3,):
            raise ValueError("origin must be a 3-vector")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        shape = tuple(int(n) for n in self.shape)
        if len(shape) != 3 or any(n < 1 for n in shape):
            raise ValueError("shape must be three positive counts")
        axes = np.eye(3) if self.axes is None else np.asarray(self.axes, dtype=float)
        if axes.shape != (3, 3):
            raise ValueError("axes must be a 3x3 matrix of row vectors")
        o.flags.writeable = False
        axes.flags.writeable = False
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "axes", axes)

    def points(self) -> np.ndarray:
        """All grid points, shape (nx*ny*nz, 3), C order over (i, j, k)."""
        nx, ny, nz = self.shape
        ii, jj, kk = np.meshgrid(np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij")
        steps = np.column_stack([ii.ravel(), jj.ravel(), kk.ravel()]).astype(float)
        return self.origin + self.spacing * steps @ self.axes


@dataclass(frozen=True)
class FieldGrid:
    """Complex pressure sampled on a GridSpec; values shape equals spec.shape."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.spec.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.spec.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class FocalMetrics:
    peak_position: np.ndarray
    peak_magnitude: float
    widths: np.ndarray  # -6 dB full widths along the three grid axes, meters


@dataclass(frozen=True)
class _SourceSet:
    """Flattened monopole/piston sources: physical elements and their images."""

    positions: np.ndarray
    normals: np.ndarray
    radii: np.ndarray
    phases: np.ndarray
    amplitudes: np.ndarray

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def mirrored(self, plane: ReflectingPlane, coefficient: float) -> "_SourceSet":
        return _SourceSet(
            positions=mirror_point(plane, self.positions),
            normals=self.normals - 2.0 * np.outer(self.normals @ plane.normal, plane.normal),
            radii=self.radii,
            phases=self.phases,
            amplitudes=self.amplitudes * coefficient,
        )

    @staticmethod
    def concat(sets: list["_SourceSet"]) -> "_SourceSet":
        return _SourceSet(
            positions=np.concatenate([s.positions for s in sets]),
            normals=np.concatenate([s.normals for s in sets]),
            radii=np.concatenate([s.radii for s in sets]),
            phases=np.concatenate([s.phases for s in sets]),
            amplitudes=np.concatenate([s.amplitudes for s in sets]),
        )


def _element_sources(scene: Scene, drive: DriveState) -> _SourceSet:
    positions, normals, radii = scene.elements()
    if drive.phases.shape[0] != positions.shape[0]:
        raise ValueError(
            f"drive has {drive.phases.shape[0]} channels but the scene has {positions.shape[0]} elements"
        )
    return _SourceSet(positions, normals, radii, drive.phases, drive.amplitudes)


def _with_plate_images(scene: Scene, base: _SourceSet) -> _SourceSet:
    rc = scene.plane.reflection_coefficient
    if rc == 0.0:
        return base
    return _SourceSet.concat([base, base.mirrored(scene.plane, rc)])


def _field_of_sources(scene: Scene, sources: _SourceSet, points: np.ndarray) -> np.ndarray:
    """Sum of source contributions at each point. No boundary checks here.

    The reduction over sources is a single pairwise np.sum per point chunk, so
    partitioning the points differently cannot change the result bits.
    """
    k = wavenumber(scene)
    p0 = scene.source_pressure
    piston = scene.directivity == "piston"
    out = np.empty(points.shape[0], dtype=complex)
    for start in range(0, points.shape[0], _POINT_CHUNK):
        pts = points[start : start + _POINT_CHUNK]
        diff = pts[:, None, :] - sources.positions[None, :, :]
        r = np.sqrt(np.sum(diff * diff, axis=2))
        if np.any(r < 1e-12):
            raise ValueError("field evaluation at a source position (r = 0 singularity)")
        if piston:
            cos_t = np.clip(np.sum(diff * sources.normals[None, :, :], axis=2) / r, -1.0, 1.0)
            sin_t = np.sqrt(1.0 - cos_t * cos_t)
            x = (k * sources.radii[None, :]) * sin_t
            small = x < 1e-8
            xs = np.where(small, 1.0, x)
            direct = np.where(small, 1.0, 2.0 * j1(xs) / xs)
        else:
            direct = 1.0
        amp = (p0 * sources.amplitudes[None, :] / r) * direct
        contrib = amp * np.exp(1j * (sources.phases[None, :] - k * r))
        out[start : start + pts.shape[0]] = np.sum(contrib, axis=1)
    return out


def _require_above_plane(plane: ReflectingPlane, points: np.ndarray, what: str) -> None:
    if np.any(plane.signed_distance(points) < -1e-12):
        raise ValueError(f"{what} must lie on or above the reflecting plane")


def focus_phases(scene: Scene, focus: FocusSpec) -> DriveState:
    """Drive that focuses at focus.target, through the plate when requested.

    Phases are k*d mod 2pi with d the element distance to the aim point (the
    mirror image of the target for reflected focusing), so contributions align
    constructively there under the exp(i*(w*t - k*r)) convention.
    """
    if focus.via_reflection:
        if scene.plane.signed_distance(focus.target) <= 0:
            raise ValueError("reflected focusing requires a target strictly above the plane")
        aim = mirror_point(scene.plane, focus.target)
    else:
        aim = focus.target
    positions, _, _ = scene.elements()
    d = np.linalg.norm(positions - aim, axis=1)
    k = wavenumber(scene)
    return DriveState(
        phases=np.mod(k * d, TWO_PI),
        amplitudes=np.ones(positions.shape[0]),
        source_pressure=scene.source_pressure,
    )


def apply_occlusion_mask(drive: DriveState, mask) -> DriveState:
    """Hand-shadowing hook: scale per-element amplitudes by factors in [0, 1].

    Ships disabled: nothing in the pipeline applies a mask by default. Callers
    modeling occlusion of part of the aperture can derive a masked drive here.
    """
    m = np.asarray(mask, dtype=float)
    if m.shape != drive.amplitudes.shape:
        raise ValueError(f"mask shape {m.shape} != amplitudes shape {drive.amplitudes.shape}")
    if np.any((m < 0) | (m > 1)):
        raise ValueError("mask factors must lie in [0, 1]")
    return DriveState(drive.phases, drive.amplitudes * m, drive.source_pressure)


def pressure_at(scene: Scene, drive: DriveState, p) -> complex | np.ndarray:
    """Complex pressure at p (a 3-vector or an (n, 3) stack of points).

    Includes the plate image contribution scaled by the reflection
    coefficient. Points must lie on or above the plate.
    """
    pts = np.asarray(p, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 3:
        raise ValueError("points must be 3-vectors")
    _require_above_plane(scene.plane, pts, "evaluation points")
    sources = _with_plate_images(scene, _element_sources(scene, drive))
    values = _field_of_sources(scene, sources, pts)
    return complex(values[0]) if single else values


def field_grid(scene: Scene, drive: DriveState, spec: GridSpec) -> FieldGrid:
    """Pressure sampled over a grid; rejects grids crossing the plate."""
    points = spec.points()
    _require_above_plane(scene.plane, points, "grid points")
    sources = _with_plate_images(scene, _element_sources(scene, drive))
    values = _field_of_sources(scene, sources, points).reshape(spec.shape)
    return FieldGrid(spec=spec, values=values)


def _width_along_axis(mags: np.ndarray, peak_idx: tuple[int, ...], axis: int, spacing: float) -> float:
    """Full width at half the peak magnitude along one grid axis, interpolated."""
    sel: list = list(peak_idx)
    sel[axis] = slice(None)
    profile = mags[tuple(sel)]
    center = peak_idx[axis]
    half = mags[peak_idx] / 2.0

    def reach(direction: int) -> float:
        i = center
        while 0 <= i + direction < profile.shape[0] and profile[i + direction] >= half:
            i += direction
        j = i + direction
        if j < 0 or j >= profile.shape[0]:
            return abs(i - center)  # never drops below half inside the grid
        frac = (profile[i] - half) / (profile[i] - profile[j])
        return abs(i - center) + float(frac)

    return spacing * (reach(+1) + reach(-1))


def focal_metrics(grid: FieldGrid, target) -> FocalMetrics:
    """Peak location/magnitude and -6 dB full widths along the grid axes."""
    mags = np.abs(grid.values)
    if not np.any(mags > 0):
        raise ValueError("all-zero field grid has no peak")
    flat = int(np.argmax(mags))
    idx = np.unravel_index(flat, mags.shape)
    spec = grid.spec
    position = spec.origin + spec.spacing * (np.asarray(idx, dtype=float) @ spec.axes)
    widths = np.array([_width_along_axis(mags, idx, ax, spec.spacing) for ax in range(3)])
    return FocalMetrics(peak_position=position, peak_magnitude=float(mags[idx]), widths=widths)


def focus_phase_spread(scene: Scene, drive: DriveState, point) -> float:
    """Spread (rad) of individual element contribution phases at a point.

    Evaluates the physical elements in free space (no plate images), which is
    the natural alignment check at at the mirrored aim point below the plate.
    """
    pts = np.atleast_2d(np.asarray(point, dtype=float))
    sources = _element_sources(scene, drive)
    k = wavenumber(scene)
    diff = pts[:, None, :] - sources.positions[None, :, :]
    r = np.sqrt(np.sum(diff * diff, axis=2))
    contrib = np.exp(1j * (sources.phases[None, :] - k * r))[0]
    rel = contrib * np.conj(contrib[0] / abs(contrib[0]))
    ang = np.angle(rel)
    return float(ang.max() - ang.min())


def boundary_residual(scene: Scene, drive: DriveState, points, step: float | None = None) -> float:
    """Max normalized |dp/dn| over sample points on the plate.

    Central finite differences with step lam/100 by default; the derivative is
    normalized by k*|p| at the sample. Zero-field samples contribute 0. With a
    unit reflection coefficient the image construction makes this vanish.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if np.any(np.abs(scene.plane.signed_distance(pts)) > 1e-9):
        raise ValueError("boundary samples must lie on the plate surface")
    lam = wavelength(scene.frequency, scene.sound_speed)
    h = lam / 100.0 if step is None else step
    k = wavenumber(scene)
    n = scene.plane.normal
    sources = _with_plate_images(scene, _element_sources(scene, drive))
    p_mid = _field_of_sources(scene, sources, pts)
    p_plus = _field_of_sources(scene, sources, pts + h * n)
    p_minus = _field_of_sources(scene, sources, pts - h * n)
    dpdn = np.abs(p_plus - p_minus) / (2.0 * h)
    mag = np.abs(p_mid)
    residual = np.where(mag > 0, dpdn / (k * np.maximum(mag, 1e-300)), 0.0)
    return float(residual.max())


def disc_quadrature(radius: float, n_radial: int = QUAD_RADIAL, n_angular: int = QUAD_ANGULAR):
    """Polar product rule over a disc: Gauss-Legendre radially, midpoint angularly.

    Returns (points (n, 2) in the disc plane, weights (n,)), with weights
    summing to the disc area.
    """
    nodes, gl_weights = roots_legendre(n_radial)
    r = 0.5 * radius * (nodes + 1.0)
    wr = 0.5 * radius * gl_weights * r
    theta = (np.arange(n_angular) + 0.5) * (TWO_PI / n_angular)
    wt = TWO_PI / n_angular
    rr, tt = np.meshgrid(r, theta, indexing="ij")
    points = np.column_stack([(rr * np.cos(tt)).ravel(), (rr * np.sin(tt)).ravel()])
    weights = np.repeat(wr, n_angular) * wt
    return points, weights


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seed = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(normal, seed)
    u /= np.linalg.norm(u)
    return u, np.cross(normal, u)


def radiation_force_disc(
    scene: Scene,
    drive: DriveState,
    disc: DiscTarget,
    gap: float,
    bounce_order: int = DEFAULT_BOUNCE_ORDER,
    n_radial: int = QUAD_RADIAL,
    n_angular: int = QUAD_ANGULAR,
) -> float:
    """Upward radiation force (N) on the rigid disc face a gap above the plate.

    Plane-wave radiation pressure on a perfect reflector, |p|^2 / (rho c^2),
    integrated over the disc face with a fixed polar quadrature. The pressure
    includes the plate image plus bounce_order additional image generations
    alternating between the rigid disc underside and the plate, which model
    the bar-plate standing wave.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    if bounce_order < 0:
        raise ValueError("bounce_order must be >= 0")
    plane = scene.plane
    if abs(abs(float(disc.normal @ plane.normal)) - 1.0) > 1e-9:
        raise ValueError("disc must be parallel to the plate")
    center_height = float(plane.signed_distance(disc.center))
    if abs(center_height - gap) > 1e-12:
        raise ValueError("disc center must sit exactly at the gap height above the plate")

    base = _with_plate_images(scene, _element_sources(scene, drive))
    total = base.count * (1 + bounce_order)
    if total > MAX_IMAGE_SOURCES:
        raise ValueError(f"bounce_order {bounce_order} needs {total} image sources (cap {MAX_IMAGE_SOURCES})")

    disc_plane = ReflectingPlane(point=disc.center, normal=plane.normal, reflection_coefficient=1.0)
    families = [base]
    current = base
    for bounce in range(1, bounce_order + 1):
        if bounce % 2 == 1:
            current = current.mirrored(disc_plane, 1.0)  # rigid underside
        else:
            current = current.mirrored(plane, plane.reflection_coefficient)
        families.append(current)
    sources = _SourceSet.concat(families) if len(families) > 1 else base

    local, weights = disc_quadrature(disc.radius, n_radial, n_angular)
    u, v = _plane_basis(plane.normal)
    points = disc.center + local[:, 0, None] * u + local[:, 1, None] * v
    p = _field_of_sources(scene, sources, points)
    pressure_sq = np.abs(p) ** 2 / (scene.air_density * scene.sound_speed**2)
    return float(np.sum(weights * pressure_sq))
