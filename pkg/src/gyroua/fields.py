"""Magnetic and electric field models plus the periodic PIC grid.

Points are passed components-first: ``x`` has shape ``(2, ...)`` and every
field evaluation broadcasts over the trailing axes.  Gradients are returned
as ``(2, 2, ...)`` with ``grad[i, j] = ∂_j F_i``; Hessians as
``(2, 2, 2, ...)`` with ``hess[i, j, m] = ∂_j ∂_m F_i``.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from gyroua import kernels

K_DEFAULT = 0.5


class FieldPositivityError(ValueError):
    """b(x) dropped to zero or below on some evaluation path."""


def _check_positive(b):
    if not np.all(b > 0.0):
        if not np.all(np.isfinite(b)):
            raise FloatingPointError("non-finite position reached the magnetic field")
        raise FieldPositivityError(f"magnetic field not positive: min b = {np.min(b):.3e}")
    return b


# -- magnetic fields ------------------------------------------------------------


class PaperMagnetic:
    """b(x) = 1 + sin(x1) sin(x2) / 2, bounded below by 1/2."""

    c0 = 0.5

    def b(self, x):
        return _check_positive(1.0 + 0.5 * np.sin(x[0]) * np.sin(x[1]))

    def grad_b(self, x):
        s1, c1 = np.sin(x[0]), np.cos(x[0])
        s2, c2 = np.sin(x[1]), np.cos(x[1])
        return 0.5 * np.stack([c1 * s2, s1 * c2])

    def hess_b(self, x):
        s1, c1 = np.sin(x[0]), np.cos(x[0])
        s2, c2 = np.sin(x[1]), np.cos(x[1])
        return 0.5 * np.stack([np.stack([-s1 * s2, c1 * c2]), np.stack([c1 * c2, -s1 * s2])])


class ConstantMagnetic:
    def __init__(self, b0):
        if not b0 > 0:
            raise FieldPositivityError("constant magnetic field must be positive")
        self.b0 = float(b0)
        self.c0 = self.b0

    def b(self, x):
        return np.full(np.shape(x[0]), self.b0)

    def grad_b(self, x):
        return np.zeros((2,) + np.shape(x[0]))

    def hess_b(self, x):
        return np.zeros((2, 2) + np.shape(x[0]))


# -- electric fields ------------------------------------------------------------


class PaperElectric:
    """E(t, x) = (cos(x1/2) sin(x2) / 2, sin(x1/2) cos(x2)) (1 + sin(t)/2)."""

    time_dependent = True

    @staticmethod
    def _g(t, order=0):
        if order == 0:
            return 1.0 + 0.5 * np.sin(t)
        if order == 1:
            return 0.5 * np.cos(t)
        return -0.5 * np.sin(t)

    @staticmethod
    def _trig(x):
        return np.sin(0.5 * x[0]), np.cos(0.5 * x[0]), np.sin(x[1]), np.cos(x[1])

    def _space(self, x):
        sh, ch, s2, c2 = self._trig(x)
        return np.stack([0.5 * ch * s2, sh * c2])

    def _space_grad(self, x):
        sh, ch, s2, c2 = self._trig(x)
        return np.stack(
            [
                np.stack([-0.25 * sh * s2, 0.5 * ch * c2]),
                np.stack([0.5 * ch * c2, -sh * s2]),
            ]
        )

    def _space_hess(self, x):
        sh, ch, s2, c2 = self._trig(x)
        h1 = np.stack(
            [
                np.stack([-0.125 * ch * s2, -0.25 * sh * c2]),
                np.stack([-0.25 * sh * c2, -0.5 * ch * s2]),
            ]
        )
        h2 = np.stack(
            [
                np.stack([-0.25 * sh * c2, -0.5 * ch * s2]),
                np.stack([-0.5 * ch * s2, -sh * c2]),
            ]
        )
        return np.stack([h1, h2])

    def e(self, t, x):
        return self._space(x) * self._g(t)

    def dt_e(self, t, x):
        return self._space(x) * self._g(t, 1)

    def dtt_e(self, t, x):
        return self._space(x) * self._g(t, 2)

    def grad_e(self, t, x):
        return self._space_grad(x) * self._g(t)

    def grad_dt_e(self, t, x):
        return self._space_grad(x) * self._g(t, 1)

    def hess_e(self, t, x):
        return self._space_hess(x) * self._g(t)


class ConstantElectric:
    """Uniform, time-independent field (zero by default)."""

    time_dependent = False

    def __init__(self, e=(0.0, 0.0)):
        self.value = np.asarray(e, dtype=float)

    def _full(self, x):
        return np.broadcast_to(self.value.reshape((2,) + (1,) * (np.ndim(x) - 1)), np.shape(x)).copy()

    def e(self, t, x):
        return self._full(x)

    def dt_e(self, t, x):
        return np.zeros(np.shape(x))

    dtt_e = dt_e

    def grad_e(self, t, x):
        return np.zeros((2,) + np.shape(x))

    grad_dt_e = grad_e

    def hess_e(self, t, x):
        return np.zeros((2, 2) + np.shape(x))


@dataclass(frozen=True)
class FieldModel:
    """Magnetic scalar plus electric source handed to the preparation and the steppers."""

    magnetic: object
    electric: object

    def b_and_e(self, t, x):
        """(b(x), E(t, x)) at the same points, sharing trigonometry for the built-in pair."""
        if type(self.magnetic) is PaperMagnetic and type(self.electric) is PaperElectric:
            sh, ch, s2, c2 = PaperElectric._trig(x)
            b = _check_positive(1.0 + sh * ch * s2)
            g = PaperElectric._g(t)
            return b, np.stack([0.5 * g * ch * s2, g * sh * c2])
        return self.magnetic.b(x), self.electric.e(t, x)


def builtin_fields(name="paper_default"):
    if name != "paper_default":
        raise ValueError(f"unknown field set {name!r}; available: paper_default")
    return PaperMagnetic(), PaperElectric()


def paper_field_model():
    return FieldModel(*builtin_fields("paper_default"))


# -- PIC grid -------------------------------------------------------------------


@dataclass
class FieldGrid:
    """Periodic nodes x = (i dx1, j dx2) on [0, 2π/k] × [0, 2π]."""

    nx1: int = 32
    nx2: int = 16
    k: float = K_DEFAULT
    rho: np.ndarray = field(default=None, repr=False)
    e_field: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.nx1 < 6 or self.nx2 < 6:
            raise ValueError("quintic splines need at least 6 nodes per direction")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.rho is None:
            self.rho = np.zeros((self.nx1, self.nx2))
        if self.e_field is None:
            self.e_field = np.zeros((2, self.nx1, self.nx2))

    @property
    def lengths(self):
        return 2.0 * np.pi / self.k, 2.0 * np.pi

    @property
    def dx1(self):
        return self.lengths[0] / self.nx1

    @property
    def dx2(self):
        return self.lengths[1] / self.nx2

    @property
    def cell_area(self):
        return self.dx1 * self.dx2

    def nodes(self):
        """Node coordinates, shape (2, nx1, nx2)."""
        x1 = np.arange(self.nx1) * self.dx1
        x2 = np.arange(self.nx2) * self.dx2
        return np.stack(np.meshgrid(x1, x2, indexing="ij"))

    def wavenumbers(self):
        k1 = self.k * np.fft.fftfreq(self.nx1, 1.0 / self.nx1)
        k2 = np.fft.fftfreq(self.nx2, 1.0 / self.nx2)
        return np.meshgrid(k1, k2, indexing="ij")

    def wrap(self, x):
        l1, l2 = self.lengths
        return np.stack([np.mod(x[0], l1), np.mod(x[1], l2)])


def deposit(grid, x, weights, workers=1):
    """Quintic-spline charge deposition; sets and returns ``grid.rho``.

    With ``workers > 1`` the particles are split into contiguous chunks whose
    partial grids are summed in chunk order, so the result depends only on
    the worker count.
    """
    xw = grid.wrap(np.asarray(x, dtype=float).reshape(2, -1))
    w = np.ascontiguousarray(np.asarray(weights, dtype=float).ravel())
    x1 = np.ascontiguousarray(xw[0])
    x2 = np.ascontiguousarray(xw[1])
    bounds = np.linspace(0, w.size, max(1, int(workers)) + 1).astype(int)
    total = np.zeros((grid.nx1, grid.nx2))
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        total += kernels.deposit(x1[lo:hi], x2[lo:hi], w[lo:hi], grid.nx1, grid.nx2, grid.dx1, grid.dx2)
    grid.rho = total / grid.cell_area
    return grid.rho


def poisson_solve(grid):
    """E = -∇φ with -Δφ = ρ - mean(ρ); sets and returns ``grid.e_field``.

    The mean mode and the unpaired Nyquist rows/columns are dropped.
    """
    kap1, kap2 = grid.wavenumbers()
    rho_hat = np.fft.fft2(grid.rho)
    k2 = kap1**2 + kap2**2
    k2[0, 0] = 1.0
    phi_hat = rho_hat / k2
    phi_hat[0, 0] = 0.0
    phi_hat[grid.nx1 // 2, :] = 0.0
    phi_hat[:, grid.nx2 // 2] = 0.0
    e1 = np.fft.ifft2(-1j * kap1 * phi_hat).real
    e2 = np.fft.ifft2(-1j * kap2 * phi_hat).real
    grid.e_field = np.ascontiguousarray(np.stack([e1, e2]))
    return grid.e_field


def spectral_divergence(grid, vec=None):
    vec = grid.e_field if vec is None else vec
    kap1, kap2 = grid.wavenumbers()
    div_hat = 1j * kap1 * np.fft.fft2(vec[0]) + 1j * kap2 * np.fft.fft2(vec[1])
    return np.fft.ifft2(div_hat).real


def spectral_gradient(grid, scalar):
    kap1, kap2 = grid.wavenumbers()
    hat = np.fft.fft2(scalar)
    hat[grid.nx1 // 2, :] = 0.0
    hat[:, grid.nx2 // 2] = 0.0
    return np.stack([np.fft.ifft2(1j * kap1 * hat).real, np.fft.ifft2(1j * kap2 * hat).real])


def project_nyquist(grid, scalar):
    """Remove the unpaired Nyquist rows/columns from a grid scalar."""
    hat = np.fft.fft2(scalar)
    hat[grid.nx1 // 2, :] = 0.0
    hat[:, grid.nx2 // 2] = 0.0
    return np.fft.ifft2(hat).real


def interp_field(grid, x, values=None):
    """Spline gather of the grid field (or of any stacked ``values``) at points ``x``."""
    x = np.asarray(x, dtype=float)
    shape = x.shape[1:]
    xw = grid.wrap(x.reshape(2, -1))
    vals = grid.e_field if values is None else values
    vals = np.ascontiguousarray(np.asarray(vals, dtype=float))
    if vals.ndim == 2:
        vals = vals[None]
    out = kernels.gather(np.ascontiguousarray(xw[0]), np.ascontiguousarray(xw[1]), vals, grid.dx1, grid.dx2)
    return out.reshape((out.shape[0],) + shape)


class GridElectric:
    """Electric field frozen from a solved grid, gathered with the deposition spline."""

    time_dependent = False

    def __init__(self, grid):
        self.grid = grid
        grads = [spectral_gradient(grid, grid.e_field[i]) for i in range(2)]
        self._grad_nodes = np.ascontiguousarray(np.stack(grads).reshape(4, grid.nx1, grid.nx2))

    def e(self, t, x):
        return interp_field(self.grid, x)

    def dt_e(self, t, x):
        return np.zeros(np.shape(x))

    dtt_e = dt_e

    def grad_e(self, t, x):
        g = interp_field(self.grid, x, self._grad_nodes)
        return g.reshape((2, 2) + np.shape(x)[1:])

    def grad_dt_e(self, t, x):
        return np.zeros((2,) + np.shape(x))


def write_grid_csv(path, grid):
    """Header ``x1,x2,rho,E1,E2``; x1 varies fastest."""
    nodes = grid.nodes()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "rho", "E1", "E2"])
        for j in range(grid.nx2):
            for i in range(grid.nx1):
                w.writerow(
                    [repr(float(v)) for v in (nodes[0, i, j], nodes[1, i, j], grid.rho[i, j], grid.e_field[0, i, j], grid.e_field[1, i, j])]
                )


def read_grid_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data
