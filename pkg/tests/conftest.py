import numpy as np
import pytest

from airbutton.acoustics import FocusSpec, focus_phases
from airbutton.geometry import ArrayPose, ReflectingPlane, Scene, build_lattice, default_scene


@pytest.fixture(scope="session")
def scene():
    return default_scene()


@pytest.fixture(scope="session")
def drive_3mm(scene):
    return focus_phases(scene, FocusSpec(target=np.array([0.0, 0.0, 3e-3])))


@pytest.fixture()
def single_element_scene():
    """One element at the origin facing +z; plate parked below with zero reflection."""
    lattice = build_lattice(1, 1, 10e-3, 4.5e-3)
    pose = ArrayPose(origin=np.zeros(3), normal=np.array([0.0, 0.0, 1.0]), u_axis=np.array([1.0, 0.0, 0.0]))
    plane = ReflectingPlane(point=np.array([0.0, 0.0, -0.05]), normal=np.array([0.0, 0.0, 1.0]), reflection_coefficient=0.0)
    return Scene(
        arrays=((lattice, pose),),
        plane=plane,
        frequency=343.0,
        sound_speed=343.0,
        air_density=1.2,
        beam_height=3e-3,
        source_pressure=1.0,
        directivity="monopole",
    )
