"""Line-of-sight uniform linear array: steering, matched precoding and the
superposition of per-antenna DAC outputs at a user.

Antennas are indexed ``0 .. M-1``. A global index shift only rotates every
steering vector by a common phase, which no EVM quantity can see.
"""
from dataclasses import dataclass, field

import numpy as np

from .quantizer import quantization_error


class UnsupportedSceneError(ValueError):
    pass


def cispi(turns):
    """``exp(j*pi*turns)`` with exact results at multiples of one half.

    Quarter-turn phases land on exactly ``+-1`` or ``+-j`` so that rotations
    of quantizer inputs stay bit-exact.
    """
    turns = np.asarray(turns, dtype=float)
    t = np.remainder(turns, 2.0)
    quadrant = np.rint(2.0 * t)
    rest = t - 0.5 * quadrant
    base = np.cos(np.pi * rest) + 1j * np.sin(np.pi * rest)
    base = np.where(rest == 0.0, 1.0 + 0j, base)
    rot = np.array([1.0 + 0j, 1j, -1.0 + 0j, -1j])[quadrant.astype(int) % 4]
    out = base * rot
    return out[()] if out.ndim == 0 else out


def steering_vector(alpha, antennas):
    """Half-wavelength ULA steering coefficients for departure angle ``alpha``."""
    m = np.arange(antennas)
    return cispi(m * np.sin(alpha))


@dataclass(frozen=True)
class ChannelScene:
    antennas: int
    users: tuple = (0.0,)
    geometry: str = "ula_half_wavelength"
    _steer: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.antennas) != self.antennas or self.antennas < 1:
            raise ValueError(f"antennas must be an integer >= 1, got {self.antennas!r}")
        users = tuple(float(a) for a in np.atleast_1d(self.users))
        if not users:
            raise ValueError("scene needs at least one user")
        for a in users:
            if not -np.pi / 2 <= a <= np.pi / 2:
                raise ValueError(f"user direction {a!r} rad outside [-pi/2, pi/2]")
        if self.geometry != "ula_half_wavelength":
            raise ValueError(f"unsupported geometry {self.geometry!r}")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "_steer",
                           np.stack([steering_vector(a, self.antennas) for a in users]))

    def steering_matrix(self):
        """``(K, M)`` array of steering coefficients (read-only view)."""
        v = self._steer.view()
        v.flags.writeable = False
        return v


def _check_user(scene, k):
    if not 0 <= k < len(scene.users):
        raise IndexError(f"user index {k} outside 0..{len(scene.users) - 1}")


def steering(scene, k, m):
    _check_user(scene, k)
    if not 0 <= m < scene.antennas:
        raise IndexError(f"antenna index {m} outside 0..{scene.antennas - 1}")
    return complex(scene._steer[k, m])


def matched_precode(y, scene, m=None):
    """Per-antenna transmit samples ``conj(c_m) * y / M`` for the single user.

    With ``m=None`` returns the full ``(..., M)`` array for samples ``y``.
    """
    if len(scene.users) != 1:
        raise UnsupportedSceneError("matched precoding is single-user only")
    y = np.asarray(y, dtype=complex) / scene.antennas
    if m is None:
        return np.conj(scene._steer[0]) * y[..., None]
    if not 0 <= m < scene.antennas:
        raise IndexError(f"antenna index {m} outside 0..{scene.antennas - 1}")
    return np.conj(scene._steer[0, m]) * y


def receive(scene, k, antenna_outputs):
    """Line-of-sight sum ``sum_m c_k(m) * out_m`` over the last axis."""
    _check_user(scene, k)
    out = np.asarray(antenna_outputs, dtype=complex)
    if out.shape[-1] != scene.antennas:
        raise ValueError(f"expected {scene.antennas} antenna outputs, got {out.shape[-1]}")
    return out @ scene._steer[k]


# Directions where every steering coefficient is one of +-1, +-j.
WORST_CASE_DIRECTIONS = (0.0, np.pi / 2, -np.pi / 2)


def worst_case_error_check(scene, y, cfg):
    """Check that ditherless per-antenna errors are coherent rotations of the
    first antenna's error, ``q_m == conj(c_m / c_0) * q_0``, bit for bit.

    Returns True only if equality holds exactly for every sample.
    """
    if len(scene.users) != 1:
        raise UnsupportedSceneError("worst-case check is single-user only")
    alpha = scene.users[0]
    if not any(alpha == a for a in WORST_CASE_DIRECTIONS):
        raise UnsupportedSceneError(
            f"direction {alpha!r} rad is not a verified worst case (0, +-pi/2)")
    x = matched_precode(y, scene)
    q = quantization_error(x, cfg).value
    c = scene._steer[0]
    expected = np.conj(c / c[0]) * q[..., :1]
    return bool(np.array_equal(q, expected))


def coherence_mismatch(scene, y, cfg):
    """Same comparison as :func:`worst_case_error_check` for any direction;
    returns the largest ``|q_m - conj(c_m / c_0) q_0|``."""
    x = matched_precode(y, scene)
    q = quantization_error(x, cfg).value
    c = scene._steer[0]
    return float(np.max(np.abs(q - np.conj(c / c[0]) * q[..., :1])))
