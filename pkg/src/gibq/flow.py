"""Linear propagator and multilinear Duhamel operator on trajectories.

Time-dependent spectral data is stored at Chebyshev-Gauss-Lobatto nodes on
[0, T] and evaluated anywhere by barycentric interpolation.  Every time
dependence produced here is a finite combination of cos/sin with radian
rates at most (k-1)j+1 (the symbol is bounded by 1), so degree-16 nodes
already give spectral accuracy on the horizons this package uses.

The Duhamel operator computes, per output frequency xi,

    integral_0^t sin((t-t') lam(xi)) lam(xi) [u_1(t') ... u_k(t')]^(xi) dt'

with the product realised as k-1 sparse convolutions at each
Clenshaw-Curtis quadrature node.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import LatticeMismatchError
from .lattice import (
    PRUNE_REL,
    FrequencyLattice,
    SpectralField,
    _prune_arrays,
    lambda_symbol,
)

DEFAULT_DEGREE = 16

# Below this |t*lam| the sine quotient switches to its Taylor series.
_SINC_SWITCH = 1e-4


def stable_sinc(x):
    """sin(x)/x with a 4-term Taylor series below the switch threshold."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = 1.0 - x2 / 6.0 + x2 * x2 / 120.0 - x2 * x2 * x2 / 5040.0
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.where(x == 0.0, 1.0, np.sin(x) / np.where(x == 0.0, 1.0, x))
    out = np.where(np.abs(x) < _SINC_SWITCH, series, direct)
    return out if out.ndim else float(out)


def sin_over_lambda(t: float, lam: np.ndarray) -> np.ndarray:
    """sin(t*lam)/lam, equal to t at the removable singularity lam = 0."""
    return t * stable_sinc(t * lam)


def chebyshev_nodes(degree: int, horizon: float) -> np.ndarray:
    """Ascending Chebyshev-Gauss-Lobatto nodes on [0, horizon]."""
    i = np.arange(degree + 1)
    return horizon / 2.0 * (1.0 - np.cos(math.pi * i / degree))


def _barycentric_weights(degree: int) -> np.ndarray:
    w = np.ones(degree + 1)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def barycentric_coeffs(nodes: np.ndarray, t: float) -> np.ndarray:
    """Interpolation coefficients gamma with p(t) = sum gamma_i * values_i."""
    w = _barycentric_weights(nodes.size - 1)
    diff = t - nodes
    exact = np.nonzero(np.abs(diff) <= 1e-15 * max(abs(t), nodes[-1], 1e-300))[0]
    coeffs = np.zeros(nodes.size)
    if exact.size:
        coeffs[exact[0]] = 1.0
        return coeffs
    g = w / diff
    return g / np.sum(g)


@lru_cache(maxsize=None)
def clenshaw_curtis_weights(degree: int) -> np.ndarray:
    """Quadrature weights on [-1, 1] for the p+1 Lobatto nodes.

    Ordering matches chebyshev_nodes (ascending); weights are symmetric so
    the cos-descending ordering coincides.  Cached and frozen per degree.
    """
    n = degree
    if n == 0:
        w = np.array([2.0])
        w.setflags(write=False)
        return w
    theta = math.pi * np.arange(n + 1) / n
    w = np.ones(n + 1)
    jmax = n // 2
    for i in range(n + 1):
        acc = 0.0
        for j in range(1, jmax + 1):
            b = 1.0 if (2 * j == n) else 2.0
            acc += b / (4.0 * j * j - 1.0) * math.cos(2.0 * j * theta[i])
        w[i] = 1.0 - acc
    w *= 2.0 / n
    w[0] *= 0.5
    w[-1] *= 0.5
    w.setflags(write=False)
    return w


@dataclass
class InitialPair:
    """Initial displacement and velocity as spectral fields."""

    u0: SpectralField
    u1: SpectralField

    def __post_init__(self):
        if self.u0.lattice != self.u1.lattice:
            raise LatticeMismatchError("pair components on different lattices")

    @property
    def lattice(self) -> FrequencyLattice:
        return self.u0.lattice

    def fl1(self) -> float:
        """Summed Wiener-algebra norm of the pair."""
        return self.u0.l1() + self.u1.l1()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return self.u0.is_hermitian(tol) and self.u1.is_hermitian(tol)

    @classmethod
    def zero(cls, lattice: FrequencyLattice) -> "InitialPair":
        z = SpectralField.zero(lattice)
        return cls(z, z)


@dataclass
class Trajectory:
    """SpectralField-valued function of time sampled at Chebyshev nodes."""

    lattice: FrequencyLattice
    horizon: float
    nodes: np.ndarray
    fields: list

    _support: np.ndarray = field(default=None, repr=False, compare=False)
    _matrix: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def degree(self) -> int:
        return self.nodes.size - 1

    def _ensure_matrix(self):
        if self._matrix is not None:
            return
        if all(f.nnz == 0 for f in self.fields):
            support = np.empty(0, np.int64)
        else:
            support = np.unique(np.concatenate([f.xi for f in self.fields if f.nnz]))
        mat = np.zeros((self.nodes.size, support.size), dtype=np.complex128)
        for i, f in enumerate(self.fields):
            if f.nnz:
                mat[i, np.searchsorted(support, f.xi)] = f.c
        self._support = support
        self._matrix = mat

    def support_and_matrix(self):
        self._ensure_matrix()
        return self._support, self._matrix

    def at(self, t: float) -> SpectralField:
        """Barycentric evaluation at any t in [0, horizon]."""
        support, mat = self.support_and_matrix()
        coeffs = barycentric_coeffs(self.nodes, t)
        c = coeffs @ mat
        keep = c != 0
        return SpectralField(self.lattice, support[keep], c[keep])

    def rows_at(self, times: np.ndarray):
        """Support plus a (len(times) x nnz) matrix of interpolated values."""
        support, mat = self.support_and_matrix()
        gamma = np.stack([barycentric_coeffs(self.nodes, t) for t in times])
        return support, gamma @ mat

    def sup_l1(self) -> float:
        return max((f.l1() for f in self.fields), default=0.0)

    def sup_distance(self, other: "Trajectory") -> float:
        """Sup over nodes of the l1 distance between node fields."""
        if self.nodes.size != other.nodes.size:
            raise LatticeMismatchError("trajectory node grids differ")
        return max(
            (a - b).l1() for a, b in zip(self.fields, other.fields)
        )

    def __add__(self, other: "Trajectory") -> "Trajectory":
        if self.lattice != other.lattice:
            raise LatticeMismatchError("trajectory lattices differ")
        if abs(self.horizon - other.horizon) > 1e-15 * max(self.horizon, 1e-300):
            raise LatticeMismatchError("trajectory horizons differ")
        return Trajectory(
            self.lattice,
            self.horizon,
            self.nodes,
            [a + b for a, b in zip(self.fields, other.fields)],
        )

    def scale(self, a) -> "Trajectory":
        return Trajectory(self.lattice, self.horizon, self.nodes,
                          [f.scale(a) for f in self.fields])

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(f.is_hermitian(tol) for f in self.fields)

    def to_json(self) -> str:
        return json.dumps({
            "horizon": self.horizon,
            "nodes": [float(t) for t in self.nodes],
            "fields": [json.loads(f.to_json()) for f in self.fields],
        })

    @classmethod
    def zero(cls, lattice: FrequencyLattice, horizon: float,
             degree: int = DEFAULT_DEGREE) -> "Trajectory":
        nodes = chebyshev_nodes(degree, horizon)
        z = SpectralField.zero(lattice)
        return cls(lattice, horizon, nodes, [z] * nodes.size)


def linear_flow(pair: InitialPair, horizon: float,
                degree: int = DEFAULT_DEGREE) -> Trajectory:
    """Free evolution cos(t*lam) u0 + (sin(t*lam)/lam) u1 at all nodes."""
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    lattice = pair.lattice
    nodes = chebyshev_nodes(degree, horizon)
    if pair.u0.nnz == 0 and pair.u1.nnz == 0:
        return Trajectory.zero(lattice, horizon, degree)
    support = np.unique(np.concatenate([pair.u0.xi, pair.u1.xi]))
    lam = lambda_symbol(support, lattice)
    c0 = np.zeros(support.size, dtype=np.complex128)
    c1 = np.zeros(support.size, dtype=np.complex128)
    if pair.u0.nnz:
        c0[np.searchsorted(support, pair.u0.xi)] = pair.u0.c
    if pair.u1.nnz:
        c1[np.searchsorted(support, pair.u1.xi)] = pair.u1.c
    fields = []
    for t in nodes:
        c = np.cos(t * lam) * c0 + sin_over_lambda(t, lam) * c1
        keep = c != 0
        fields.append(SpectralField(lattice, support[keep], c[keep]))
    return Trajectory(lattice, horizon, nodes, fields)


def _check_args(args):
    if not args:
        raise ValueError("duhamel needs at least one trajectory")
    first = args[0]
    for a in args[1:]:
        if a.lattice != first.lattice:
            raise LatticeMismatchError("duhamel arguments on different lattices")
        if abs(a.horizon - first.horizon) > 1e-15 * max(first.horizon, 1e-300):
            raise LatticeMismatchError("duhamel arguments with different horizons")


# Widest dense bounding box the batched Duhamel fold will allocate; wider
# supports (e.g. cubes around astronomically large frequencies) take the
# sparse per-node path instead.
_DENSE_FOLD_CAP = 1 << 23


def duhamel(args: list, t_eval: float, quad_degree: int = DEFAULT_DEGREE,
            prune: float = PRUNE_REL) -> SpectralField:
    """Multilinear Duhamel integral of k trajectories at time t_eval.

    The k-fold product is built for all quadrature nodes at once: each fold
    is a batch of linear convolutions over a shared dense bounding box
    (FFT), and the sine kernel is only evaluated on the nonzero columns.
    Supports spanning more than the dense cap fall back to per-node sparse
    convolutions, which only cost the number of stored modes.
    """
    _check_args(args)
    lattice = args[0].lattice
    if t_eval < 0 or t_eval > args[0].horizon * (1 + 1e-12):
        raise ValueError("t_eval outside [0, horizon]")
    if t_eval == 0.0:
        return SpectralField.zero(lattice)

    taus = chebyshev_nodes(quad_degree, t_eval)
    weights = clenshaw_curtis_weights(quad_degree) * (t_eval / 2.0)
    rows = [traj.rows_at(taus) for traj in args]
    if any(sup.size == 0 for sup, _ in rows):
        return SpectralField.zero(lattice)

    total_span = sum(int(sup[-1]) - int(sup[0]) for sup, _ in rows) + 1
    if total_span <= _DENSE_FOLD_CAP:
        xi, out = _duhamel_dense(lattice, rows, taus, weights, t_eval)
    else:
        xi, out = _duhamel_sparse(lattice, rows, taus, weights, t_eval, prune)
    if xi.size == 0:
        return SpectralField.zero(lattice)
    if lattice.weight != 1.0:
        out = out * lattice.weight ** (len(args) - 1)
    xi, out = _prune_arrays(xi, out, prune)
    keep = out != 0
    xi, out = xi[keep], out[keep]
    if xi.size:
        worst = int(xi[np.argmax(np.abs(xi))])
        if abs(worst) > lattice.cutoff:
            from .errors import CutoffOverflowError

            raise CutoffOverflowError(worst, lattice.cutoff)
    return SpectralField(lattice, xi, out)


def _duhamel_dense(lattice, rows, taus, weights, t_eval):
    """Batched dense-box fold over all quadrature nodes at once."""
    sup, mat = rows[0]
    lo = int(sup[0])
    box = int(sup[-1]) - lo + 1
    dense = np.zeros((taus.size, box), dtype=np.complex128)
    dense[:, sup - lo] = mat
    for sup2, mat2 in rows[1:]:
        lo2 = int(sup2[0])
        nbox = box + int(sup2[-1]) - lo2
        n2 = 1 << int(nbox - 1).bit_length()
        a = np.zeros((taus.size, n2), dtype=np.complex128)
        a[:, :box] = dense
        b = np.zeros((taus.size, n2), dtype=np.complex128)
        b[:, sup2 - lo2] = mat2
        dense = np.fft.ifft(np.fft.fft(a, axis=1) * np.fft.fft(b, axis=1),
                            axis=1)[:, :nbox]
        lo += lo2
        box = nbox
    cols = np.nonzero(np.any(dense != 0, axis=0))[0]
    if cols.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.complex128)
    xi = (lo + cols).astype(np.int64)
    lam = lambda_symbol(xi, lattice)
    kernel = np.sin(np.outer(t_eval - taus, lam)) * lam[None, :]
    out = np.einsum("q,qm,qm->m", weights, kernel, dense[:, cols])
    return xi, out


def _duhamel_sparse(lattice, rows, taus, weights, t_eval, prune):
    """Per-node sparse fold for supports too wide for a dense box."""
    from .lattice import _convolve_arrays

    pieces_xi = []
    pieces_c = []
    for q, (tau, w) in enumerate(zip(taus, weights)):
        xi, c = rows[0][0], rows[0][1][q]
        keep = c != 0
        xi, c = xi[keep], c[keep]
        for sup, mat in rows[1:]:
            cq = mat[q]
            keep = cq != 0
            if xi.size == 0 or not np.any(keep):
                xi = np.empty(0, np.int64)
                break
            xi, c = _convolve_arrays(xi, c, sup[keep], cq[keep])
            xi, c = _prune_arrays(xi, c, prune)
        if xi.size == 0:
            continue
        lam = lambda_symbol(xi, lattice)
        pieces_xi.append(xi)
        pieces_c.append(w * np.sin((t_eval - tau) * lam) * lam * c)
    if not pieces_xi:
        return np.empty(0, np.int64), np.empty(0, np.complex128)
    allxi = np.concatenate(pieces_xi)
    allc = np.concatenate(pieces_c)
    uniq, inv = np.unique(allxi, return_inverse=True)
    out = np.zeros(uniq.size, dtype=np.complex128)
    np.add.at(out, inv, allc)
    return uniq, out


def duhamel_trajectory(args: list, quad_degree: int = DEFAULT_DEGREE,
                       prune: float = PRUNE_REL) -> Trajectory:
    """Duhamel integral evaluated at every node of the argument grid."""
    _check_args(args)
    base = args[0]
    fields = [
        duhamel(args, float(t), quad_degree=quad_degree, prune=prune)
        for t in base.nodes
    ]
    return Trajectory(base.lattice, base.horizon, base.nodes, fields)
