"""World geometry: transducer lattices, array poses, the reflecting plate.

All quantities are SI (meters, Hz, kg/m^3). The coordinate frame puts the
reflecting plate at z = 0 with +z pointing into the workspace, so "above the
plate" always means positive signed distance along the plate normal.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12

# Emitter defaults: 40 kHz air-coupled transducers on a rectangular lattice.
# The lattice parameters are device-class defaults and fully configurable.
DEFAULT_ROWS = 14
DEFAULT_COLS = 18
DEFAULT_PITCH = 10.16e-3
DEFAULT_ELEMENT_RADIUS = 4.5e-3

# Per-element pressure-times-distance at unit drive (Pa*m). Calibrated so a
# single default lattice focused straight ahead at 200 mm pushes on a 10 mm
# disc with a force in the tens-of-millinewtons range (46 mN at 10.0).
DEFAULT_SOURCE_PRESSURE = 10.0


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


def _unit(v: np.ndarray, name: str) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} must be a unit vector (|v| = {n})")
    return v


@dataclass(frozen=True)
class TransducerLattice:
    """Regular rows x cols grid of piston elements, centered on the local origin."""

    rows: int
    cols: int
    pitch: float
    element_radius: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("lattice needs rows >= 1 and cols >= 1")
        if self.pitch <= 0:
            raise ValueError("pitch must be positive")
        if not 0 < self.element_radius < self.pitch / 2:
            raise ValueError("element_radius must lie in (0, pitch/2)")

    @property
    def count(self) -> int:
        return self.rows * self.cols

    def element_positions(self) -> np.ndarray:
        """Local-frame element centers, shape (rows*cols, 3), z = 0.

        Columns run along local x, rows along local y, so the grid spans
        (cols-1)*pitch by (rows-1)*pitch.
        """
        xs = (np.arange(self.cols) - (self.cols - 1) / 2.0) * self.pitch
        ys = (np.arange(self.rows) - (self.rows - 1) / 2.0) * self.pitch
        gx, gy = np.meshgrid(xs, ys, indexing="xy")
        out = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(self.count)])
        return out


def build_lattice(rows: int, cols: int, pitch: float, element_radius: float) -> TransducerLattice:
    """Validated lattice constructor; see TransducerLattice for the local layout."""
    return TransducerLattice(rows=rows, cols=cols, pitch=pitch, element_radius=element_radius)


@dataclass(frozen=True)
class ArrayPose:
    """Rigid placement of a lattice: origin plus an orthonormal (u, normal) pair.

    `normal` is the emission direction; `u_axis` is the in-plane direction the
    lattice local x axis maps onto. Local y maps onto normal x u_axis.
    """

    origin: np.ndarray
    normal: np.ndarray
    u_axis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", _as_vec3(self.origin))
        object.__setattr__(self, "normal", _unit(_as_vec3(self.normal), "normal"))
        object.__setattr__(self, "u_axis", _unit(_as_vec3(self.u_axis), "u_axis"))
        if abs(float(np.dot(self.normal, self.u_axis))) > UNIT_TOL:
            raise ValueError("u_axis must be orthogonal to normal")
        for a in ("origin", "normal", "u_axis"):
            getattr(self, a).flags.writeable = False

    @property
    def v_axis(self) -> np.ndarray:
        return np.cross(self.normal, self.u_axis)

    def rotation(self) -> np.ndarray:
        """3x3 matrix whose columns are the world images of local x, y, z."""
        return np.column_stack([self.u_axis, self.v_axis, self.normal])


def identity_pose() -> ArrayPose:
    return ArrayPose(origin=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]), u_axis=np.array([1.0, 0.0, 0.0]))


def pose_array(lattice: TransducerLattice, pose: ArrayPose) -> tuple[np.ndarray, np.ndarray]:
    """World-frame element positions and normals for a posed lattice.

    Returns (positions (n, 3), normals (n, 3)); every element shares the pose
    normal since the emission plane is flat.
    """
    local = lattice.element_positions()
    positions = pose.origin + local @ pose.rotation().T
    normals = np.broadcast_to(pose.normal, positions.shape).copy()
    return positions, normals


@dataclass(frozen=True)
class ReflectingPlane:
    """Infinite rigid plane; reflection_coefficient 1.0 models the aluminum plate."""

    point: np.ndarray
    normal: np.ndarray
    reflection_coefficient: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "point", _as_vec3(self.point))
        object.__setattr__(self, "normal", _unit(_as_vec3(self.normal), "plane normal"))
        if not 0.0 <= self.reflection_coefficient <= 1.0:
            raise ValueError("reflection_coefficient must lie in [0, 1]")
        self.point.flags.writeable = False
        self.normal.flags.writeable = False

    def signed_distance(self, p) -> np.ndarray:
        """Signed distance along the normal; positive on the emission side."""
        p = np.asarray(p, dtype=float)
        return (p - self.point) @ self.normal


@dataclass(frozen=True)
class Scene:
    """Full simulation scene: arrays, plate, medium, and sensor beam height."""

    arrays: tuple[tuple[TransducerLattice, ArrayPose], ...]
    plane: ReflectingPlane
    frequency: float
    sound_speed: float
    air_density: float
    beam_height: float
    source_pressure: float = DEFAULT_SOURCE_PRESSURE
    directivity: str = "piston"
    plate_extent: tuple[float, float] = (0.12, 0.12)  # recorded for the UI only

    def __post_init__(self):
        object.__setattr__(self, "arrays", tuple((lat, pose) for lat, pose in self.arrays))
        if self.frequency <= 0 or self.sound_speed <= 0:
            raise ValueError("frequency and sound_speed must be positive")
        if self.air_density <= 0:
            raise ValueError("air_density must be positive")
        if self.beam_height <= 0:
            raise ValueError("beam_height must be positive")
        if self.source_pressure <= 0:
            raise ValueError("source_pressure must be positive")
        if self.directivity not in ("piston", "monopole"):
            raise ValueError("directivity must be 'piston' or 'monopole'")
        for _, pose in self.arrays:
            if self.plane.signed_distance(pose.origin) <= 0:
                raise ValueError("array origins must lie strictly on the emission side of the plane")

    @property
    def element_count(self) -> int:
        return sum(lat.count for lat, _ in self.arrays)

    def elements(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All element positions, normals and piston radii, concatenated over arrays."""
        pos, nrm, rad = [], [], []
        for lat, pose in self.arrays:
            p, n = pose_array(lat, pose)
            pos.append(p)
            nrm.append(n)
            rad.append(np.full(lat.count, lat.element_radius))
        return np.concatenate(pos), np.concatenate(nrm), np.concatenate(rad)

    # --- serialization (human-readable key/value tree) ---

    def to_dict(self) -> dict:
        return {
            "arrays": [
                {
                    "lattice": {
                        "rows": lat.rows,
                        "cols": lat.cols,
                        "pitch_m": lat.pitch,
                        "element_radius_m": lat.element_radius,
                    },
                    "pose": {
                        "origin_m": list(pose.origin),
                        "normal": list(pose.normal),
                        "u_axis": list(pose.u_axis),
                    },
                }
                for lat, pose in self.arrays
            ],
            "plane": {
                "point_m": list(self.plane.point),
                "normal": list(self.plane.normal),
                "reflection_coefficient": self.plane.reflection_coefficient,
            },
            "frequency_hz": self.frequency,
            "sound_speed_m_s": self.sound_speed,
            "air_density_kg_m3": self.air_density,
            "beam_height_m": self.beam_height,
            "source_pressure_pa_m": self.source_pressure,
            "directivity": self.directivity,
            "plate_extent_m": list(self.plate_extent),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        try:
            arrays = tuple(
                (
                    TransducerLattice(
                        rows=int(a["lattice"]["rows"]),
                        cols=int(a["lattice"]["cols"]),
                        pitch=float(a["lattice"]["pitch_m"]),
                        element_radius=float(a["lattice"]["element_radius_m"]),
                    ),
                    ArrayPose(
                        origin=a["pose"]["origin_m"],
                        normal=a["pose"]["normal"],
                        u_axis=a["pose"]["u_axis"],
                    ),
                )
                for a in d["arrays"]
            )
            plane = ReflectingPlane(
                point=d["plane"]["point_m"],
                normal=d["plane"]["normal"],
                reflection_coefficient=float(d["plane"]["reflection_coefficient"]),
            )
            return cls(
                arrays=arrays,
                plane=plane,
                frequency=float(d["frequency_hz"]),
                sound_speed=float(d["sound_speed_m_s"]),
                air_density=float(d["air_density_kg_m3"]),
                beam_height=float(d["beam_height_m"]),
                source_pressure=float(d["source_pressure_pa_m"]),
                directivity=str(d.get("directivity", "piston")),
                plate_extent=tuple(d.get("plate_extent_m", (0.12, 0.12))),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed scene config: {exc}") from exc


def save_scene(scene: Scene, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_scene(path: str) -> Scene:
    if not os.path.exists(path):
        raise FileNotFoundError(f"scene file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed scene config {path}: {exc}") from exc
    return Scene.from_dict(d)


def default_scene() -> Scene:
    """The apparatus this simulator reproduces.

    Two lattices with centers 200 mm above the plate and 270 mm apart, each
    emission plane tilted 45 degrees toward the workspace center; 40 kHz
    carrier in 340 m/s air (wavelength 8.5 mm); sensor beam 3 mm above the
    plate; rigid plate at z = 0.
    """
    lattice = build_lattice(DEFAULT_ROWS, DEFAULT_COLS, DEFAULT_PITCH, DEFAULT_ELEMENT_RADIUS)
    half = math.sqrt(0.5)
    height = 0.200
    spacing = 0.270
    left = ArrayPose(
        origin=np.array([-spacing / 2, 0.0, height]),
        normal=np.array([half, 0.0, -half]),
        u_axis=np.array([half, 0.0, half]),
    )
    right = ArrayPose(
        origin=np.array([spacing / 2, 0.0, height]),
        normal=np.array([-half, 0.0, -half]),
        u_axis=np.array([-half, 0.0, half]),
    )
    plane = ReflectingPlane(point=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]), reflection_coefficient=1.0)
    return Scene(
        arrays=((lattice, left), (lattice, right)),
        plane=plane,
        frequency=40e3,
        sound_speed=340.0,
        air_density=1.2,
        beam_height=3e-3,
    )
