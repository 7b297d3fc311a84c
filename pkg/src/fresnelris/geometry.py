"""Geometric kernels for a planar RIS between two terminals.

Everything here works in meters, on plain ``numpy`` arrays of shape ``(3,)``
for points and ``(n, 3)`` for point sets.  Functions are pure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299792458.0

# foci closer than this are treated as coincident
MIN_FOCAL_DISTANCE = 1e-9
# in-plane tolerance for far-field linearization
PLANE_TOLERANCE = 1e-9
# conic classification tolerance, relative to the quadratic-part scale
CONIC_TOLERANCE = 1e-12


class GeometryError(ValueError):
    """Raised for degenerate geometric input (coincident foci, off-plane points)."""


def wavelength(frequency: float) -> float:
    if not frequency > 0:
        raise ValueError(f"frequency must be positive, got {frequency!r}")
    return SPEED_OF_LIGHT / frequency


def as_point(p) -> np.ndarray:
    """Coerce ``p`` to a finite float64 3-vector."""
    arr = np.asarray(p, dtype=np.float64)
    if arr.shape != (3,):
        raise GeometryError(f"expected a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError(f"non-finite coordinates: {arr}")
    return arr


def _unit(vec: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(vec)
    if n == 0:
        raise GeometryError("cannot normalize a zero vector")
    return vec / n


@dataclass(frozen=True)
class PlaneFrame:
    """Orthonormal frame of the RIS plane; ``normal = u_axis x v_axis``."""

    center: np.ndarray
    u_axis: np.ndarray
    v_axis: np.ndarray
    normal: np.ndarray = field(init=False)

    def __post_init__(self):
        c = as_point(self.center)
        u = as_point(self.u_axis)
        v = as_point(self.v_axis)
        for name, vec in (("u_axis", u), ("v_axis", v)):
            if abs(np.linalg.norm(vec) - 1.0) > 1e-12:
                raise GeometryError(f"{name} is not unit length: {vec}")
        if abs(u @ v) > 1e-12:
            raise GeometryError("u_axis and v_axis are not orthogonal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "u_axis", u)
        object.__setattr__(self, "v_axis", v)
        object.__setattr__(self, "normal", np.cross(u, v))

    @classmethod
    def from_axes(cls, center, u_axis, v_axis) -> "PlaneFrame":
        """Build a frame from approximate axes; ``v`` is re-orthogonalized against ``u``."""
        u = _unit(as_point(u_axis))
        v = as_point(v_axis)
        v = _unit(v - (v @ u) * u)
        return cls(center, u, v)

    @classmethod
    def bisector(cls, center, tx, rx) -> "PlaneFrame":
        """Frame facing both terminals.

        The normal is the normalized sum of the unit directions from ``center``
        toward ``tx`` and ``rx``.  ``u`` is the global x axis projected onto the
        plane (falling back to y when x is parallel to the normal) and
        ``v = normal x u``.
        """
        c = as_point(center)
        to_tx = _unit(as_point(tx) - c)
        to_rx = _unit(as_point(rx) - c)
        normal = _unit(to_tx + to_rx)
        for ref in (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])):
            u = ref - (ref @ normal) * normal
            if np.linalg.norm(u) > 1e-6:
                break
        u = _unit(u)
        v = np.cross(normal, u)
        return cls(c, u, v)

    def to_plane(self, p) -> np.ndarray:
        """Plane coordinates ``(u, v)`` of points ``p`` (projected onto the plane)."""
        d = np.asarray(p, dtype=np.float64) - self.center
        return np.stack([d @ self.u_axis, d @ self.v_axis], axis=-1)

    def from_plane(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=np.float64)
        return (self.center + uv[..., 0:1] * self.u_axis
                + uv[..., 1:2] * self.v_axis)


@dataclass(frozen=True)
class RisGeometry:
    frame: PlaneFrame
    nx: int
    ny: int
    spacing: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise ValueError(f"element counts must be positive integers, got {self.nx}x{self.ny}")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def diagonal(self) -> float:
        """Aperture diameter, measured between outermost element centers."""
        return float(np.hypot((self.nx - 1) * self.spacing, (self.ny - 1) * self.spacing))

    def indices(self) -> tuple[np.ndarray, np.ndarray]:
        """Row-major ``(i, j)`` index arrays matching :func:`element_positions`."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny), indexing="ij")
        return i.ravel(), j.ravel()


def element_positions(geom: RisGeometry) -> np.ndarray:
    """Element centers as an ``(nx*ny, 3)`` array, row-major over ``(i, j)``."""
    i, j = geom.indices()
    a = (i - (geom.nx - 1) / 2) * geom.spacing
    b = (j - (geom.ny - 1) / 2) * geom.spacing
    f = geom.frame
    return f.center + a[:, None] * f.u_axis + b[:, None] * f.v_axis


def _los_distance(tx: np.ndarray, rx: np.ndarray) -> float:
    d = float(np.linalg.norm(rx - tx))
    if d < MIN_FOCAL_DISTANCE:
        raise GeometryError(f"tx and rx coincide (distance {d:.3e} m)")
    return d


def excess_path(tx, rx, q):
    """Path-length excess of the bounce ``tx -> q -> rx`` over the direct path.

    ``q`` may be a single point or an ``(n, 3)`` array.  The result is clamped
    at zero so rounding cannot produce a negative excess.
    """
    tx, rx = as_point(tx), as_point(rx)
    los = _los_distance(tx, rx)
    q = np.asarray(q, dtype=np.float64)
    d1 = np.linalg.norm(q - tx, axis=-1)
    d2 = np.linalg.norm(rx - q, axis=-1)
    delta = np.maximum(d1 + d2 - los, 0.0)
    return float(delta) if delta.ndim == 0 else delta


@dataclass(frozen=True)
class FresnelMap:
    """Per-element Fresnel-zone bookkeeping for one ``(tx, rx)`` pair.

    Zones are half-open: an excess in ``[(m-1)*lam/2, m*lam/2)`` belongs to zone ``m``.
    """

    wavelength: float
    los_distance: float
    excess: np.ndarray
    zone: np.ndarray
    residual: np.ndarray
    nx: int = 0
    ny: int = 0

    @classmethod
    def from_excess(cls, excess, wavelength: float, los_distance: float,
                    nx: int = 0, ny: int = 0) -> "FresnelMap":
        if not wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {wavelength!r}")
        excess = np.asarray(excess, dtype=np.float64)
        if np.any(excess < 0) or not np.all(np.isfinite(excess)):
            raise GeometryError("excess path must be finite and nonnegative")
        half = wavelength / 2
        zone = np.floor(excess / half).astype(np.int64) + 1
        residual = excess - (zone - 1) * half
        # division rounding can land a hair outside [0, half)
        low = residual < 0
        zone[low] -= 1
        residual[low] += half
        high = residual >= half
        zone[high] += 1
        residual[high] -= half
        return cls(wavelength, los_distance, excess, zone, residual, nx, ny)

    def __len__(self):
        return self.excess.size


def build_fresnel_map(tx, rx, geom: RisGeometry, wavelength: float) -> FresnelMap:
    tx, rx = as_point(tx), as_point(rx)
    los = _los_distance(tx, rx)
    delta = excess_path(tx, rx, element_positions(geom))
    return FresnelMap.from_excess(delta, wavelength, los, geom.nx, geom.ny)


@dataclass(frozen=True)
class ConicSection:
    """``A u^2 + B uv + C v^2 + D u + E v + F = 0`` in plane coordinates."""

    A: float
    B: float
    C: float
    D: float
    E: float
    F: float
    classification: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "classification", self._classify())

    @property
    def coefficients(self) -> tuple[float, ...]:
        return (self.A, self.B, self.C, self.D, self.E, self.F)

    @property
    def discriminant(self) -> float:
        return self.B ** 2 - 4 * self.A * self.C

    def _quadratic_scale(self) -> float:
        return max(abs(self.A), abs(self.B), abs(self.C))

    def _center_and_level(self):
        """Center of an elliptic conic and ``k`` with ``(x-x0)^T Q (x-x0) = k``.

        Coefficients are divided by the quadratic-part magnitude first, so
        ``Q`` has unit scale.  Also returns the scale of the terms making up ``k``.
        """
        s = self._quadratic_scale()
        A, B, C, D, E, F = (x / s for x in self.coefficients)
        Q = np.array([[A, B / 2], [B / 2, C]])
        x0 = np.linalg.solve(Q, -0.5 * np.array([D, E]))
        centre_term = x0 @ Q @ x0
        return Q, x0, centre_term - F, max(abs(centre_term), abs(F), 1.0)

    def _classify(self) -> str:
        s = self._quadratic_scale()
        if s <= CONIC_TOLERANCE * max(abs(x) for x in self.coefficients):
            return "degenerate"
        if self.discriminant / s ** 2 >= -CONIC_TOLERANCE:
            return "degenerate"
        _, _, k, scale = self._center_and_level()
        if self.A < 0:
            k = -k
        if k > CONIC_TOLERANCE * scale:
            return "ellipse"
        if k >= -CONIC_TOLERANCE * scale:
            return "point"
        return "empty"

    def evaluate(self, u, v):
        A, B, C, D, E, F = self.coefficients
        return A * u * u + B * u * v + C * v * v + D * u + E * v + F

    def sample(self, count: int) -> np.ndarray:
        """``count`` points ``(u, v)`` evenly spaced in parameter along an ellipse."""
        if self.classification not in ("ellipse", "point"):
            raise GeometryError(f"cannot sample a conic classified as {self.classification}")
        Q, x0, k, _ = self._center_and_level()
        if self.A < 0:
            Q, k = -Q, -k
        evals, evecs = np.linalg.eigh(Q)
        radii = np.sqrt(np.maximum(k / evals, 0.0))
        t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        local = np.stack([radii[0] * np.cos(t), radii[1] * np.sin(t)], axis=-1)
        return x0 + local @ evecs.T


def zone_boundary_conic(tx, rx, frame: PlaneFrame, m: int, wavelength: float) -> ConicSection:
    """Intersection of the ``m``-th Fresnel ellipsoid with the plane of ``frame``.

    The ellipsoid is the locus where the excess path equals ``m * wavelength / 2``.
    It is written as ``(p - mid)^T M (p - mid) = b^2`` with
    ``M = I + (b^2/a^2 - 1) w w^T`` (``w`` the focal axis), and the plane
    parametrization ``p = center + u*u_axis + v*v_axis`` is substituted exactly.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"zone index must be a positive integer, got {m!r}")
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    tx, rx = as_point(tx), as_point(rx)
    los = _los_distance(tx, rx)
    extra = m * wavelength / 4  # a - f
    a = los / 2 + extra
    b2 = extra * (los + extra)
    w = (rx - tx) / los
    mid = (tx + rx) / 2
    M = np.eye(3) + (b2 / a ** 2 - 1.0) * np.outer(w, w)
    d = frame.center - mid
    u, v = frame.u_axis, frame.v_axis
    return ConicSection(
        A=float(u @ M @ u),
        B=float(2 * u @ M @ v),
        C=float(v @ M @ v),
        D=float(2 * d @ M @ u),
        E=float(2 * d @ M @ v),
        F=float(d @ M @ d - b2),
    )


def _far_field_direction(tx, rx, frame: PlaneFrame) -> np.ndarray:
    to_tx = _unit(as_point(tx) - frame.center)
    to_rx = _unit(as_point(rx) - frame.center)
    return to_tx + to_rx


def far_field_excess_path(tx, rx, frame: PlaneFrame, q):
    """Plane-wave approximation of the excess path relative to the RIS center.

    Returns ``-(u_tx + u_rx) . (q - center)`` with ``u_tx``, ``u_rx`` the unit
    directions from the center to the terminals.  ``q`` must lie in the plane.
    """
    q = np.asarray(q, dtype=np.float64)
    offset = q - frame.center
    height = np.abs(offset @ frame.normal)
    if np.any(height > PLANE_TOLERANCE):
        raise GeometryError(f"point lies {np.max(height):.3e} m off the RIS plane")
    val = -(offset @ _far_field_direction(tx, rx, frame))
    return float(val) if np.ndim(val) == 0 else val


def far_field_zone_boundary(tx, rx, frame: PlaneFrame, m: int, wavelength: float) -> ConicSection:
    """Far-field counterpart of :func:`zone_boundary_conic`: a straight line.

    Solves ``excess(center) + far_field_excess_path(q) = m * wavelength / 2``.
    """
    if int(m) != m or m < 1:
        raise ValueError(f"zone index must be a positive integer, got {m!r}")
    g = _far_field_direction(tx, rx, frame)
    base = excess_path(tx, rx, frame.center)
    return ConicSection(0.0, 0.0, 0.0,
                        float(-(g @ frame.u_axis)), float(-(g @ frame.v_axis)),
                        base - m * wavelength / 2)


def far_field_fresnel_map(tx, rx, geom: RisGeometry, wavelength: float) -> FresnelMap:
    """Fresnel map built from the linearized excess path (center excess + plane-wave term)."""
    tx, rx = as_point(tx), as_point(rx)
    los = _los_distance(tx, rx)
    base = excess_path(tx, rx, geom.frame.center)
    delta = base + far_field_excess_path(tx, rx, geom.frame, element_positions(geom))
    return FresnelMap.from_excess(np.maximum(delta, 0.0), wavelength, los, geom.nx, geom.ny)


def fraunhofer_distance(aperture: float, wavelength: float) -> float:
    """Near/far-field boundary ``2 D^2 / wavelength``."""
    if aperture < 0:
        raise ValueError(f"aperture must be nonnegative, got {aperture!r}")
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    return 2.0 * aperture ** 2 / wavelength
