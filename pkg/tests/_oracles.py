"""Independent reference implementations used to cross-check the fast paths.

These deliberately avoid the package's internal helpers: plain Python loops,
compensated (fsum) accumulation, and inline formulas.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import j1


def mirror_across(point, normal, positions, normals):
    """Mirror source positions and orientations across a plane, written out."""
    point = np.asarray(point, dtype=float)
    normal = np.asarray(normal, dtype=float)
    mp = []
    mn = []
    for p, n in zip(positions, normals):
        d = float(np.dot(p - point, normal))
        mp.append(p - 2.0 * d * normal)
        mn.append(n - 2.0 * float(np.dot(n, normal)) * normal)
    return np.array(mp), np.array(mn)


def brute_force_field(positions, normals, radii, phases, amplitudes, source_pressure, k, piston, points):
    """Per-point fsum of every source contribution; slow but order-insensitive."""
    out = []
    for pt in np.atleast_2d(points):
        re, im = [], []
        for i in range(len(positions)):
            dx = pt - positions[i]
            r = math.sqrt(float(np.dot(dx, dx)))
            if piston:
                ct = float(np.dot(dx, normals[i])) / r
                st = math.sqrt(max(0.0, 1.0 - ct * ct))
                x = k * radii[i] * st
                d_factor = 1.0 if x < 1e-8 else 2.0 * float(j1(x)) / x
            else:
                d_factor = 1.0
            c = (source_pressure * amplitudes[i] / r) * d_factor * cmath.exp(1j * (phases[i] - k * r))
            re.append(c.real)
            im.append(c.imag)
        out.append(complex(math.fsum(re), math.fsum(im)))
    return np.array(out)


def scene_brute_force_with_plate(scene, drive, points):
    """Free-space field of the physical array union its explicit mirror image."""
    positions, normals, radii = scene.elements()
    mp, mn = mirror_across(scene.plane.point, scene.plane.normal, positions, normals)
    rc = scene.plane.reflection_coefficient
    all_pos = np.vstack([positions, mp])
    all_nrm = np.vstack([normals, mn])
    all_rad = np.concatenate([radii, radii])
    all_phase = np.concatenate([drive.phases, drive.phases])
    all_amp = np.concatenate([drive.amplitudes, drive.amplitudes * rc])
    k = 2.0 * math.pi * scene.frequency / scene.sound_speed
    return brute_force_field(
        all_pos, all_nrm, all_rad, all_phase, all_amp,
        drive.source_pressure, k, scene.directivity == "piston", points,
    )
