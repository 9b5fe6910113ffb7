"""Matrix Lie-group calculus for the discrete diffeomorphism group.

The group is the set of Omega-orthogonal signed-stochastic matrices; its
Lie algebra is the set of Omega-antisymmetric row-null matrices, paired
with antisymmetric one-form matrices through the Omega-weighted Frobenius
inner product.  The Cayley transform serves as the group difference map,
and a generic discrete Euler-Poincare stepper with advected parameters is
built on top of it.

Everything here is dense and sized for a few hundred cells at most: this
module is the reference/oracle path.  Large grids go through the stencil
operators in :mod:`geovar.grid`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
import scipy.linalg

from .errors import NoConvergence, SingularMatrix

__all__ = [
    "AlgebraMatrix",
    "GroupMatrix",
    "SemidirectAlgebraElement",
    "SemidirectGroupElement",
    "NewtonConfig",
    "TauCalculus",
    "cayley",
    "cayley_inv",
    "dcay",
    "dcay_inv",
    "dcay_inv_star",
    "dcay_star",
    "pairing",
    "pairing_scalar",
    "semidirect_exp",
    "semidirect_tau",
    "semidirect_product",
    "semidirect_inverse",
    "semidirect_dtau_inv",
    "semidirect_dtau_inv_star",
    "dep_step",
    "newton_solve",
    "random_algebra_matrix",
]

_ATOL = 1e-12


def _check_algebra(entries: np.ndarray, omega: np.ndarray, atol: float = 1e-9) -> None:
    scale = max(1.0, float(np.abs(entries).max(initial=0.0)))
    row = np.abs(entries.sum(axis=1)).max(initial=0.0)
    if row > atol * scale:
        raise ValueError(f"rows do not sum to zero (max {row:.3e})")
    skew = entries.T * omega[None, :] + omega[:, None] * entries
    err = np.abs(skew).max(initial=0.0)
    if err > atol * scale * omega.max():
        raise ValueError(f"matrix is not Omega-antisymmetric (max {err:.3e})")


def _check_group(entries: np.ndarray, omega: np.ndarray, atol: float = 1e-9) -> None:
    row = np.abs(entries.sum(axis=1) - 1.0).max(initial=0.0)
    if row > atol:
        raise ValueError(f"rows do not sum to one (max deviation {row:.3e})")
    gram = entries.T @ (omega[:, None] * entries) - np.diag(omega)
    err = np.abs(gram).max(initial=0.0)
    if err > atol * omega.max():
        raise ValueError(f"matrix is not Omega-orthogonal (max {err:.3e})")


@dataclass(frozen=True)
class AlgebraMatrix:
    """Omega-antisymmetric, row-null matrix (a discrete vector field)."""

    entries: np.ndarray
    cell_volumes: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        omega = np.asarray(self.cell_volumes, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("entries must be a square matrix")
        if omega.shape != (entries.shape[0],) or (omega <= 0).any():
            raise ValueError("cell_volumes must be a positive N-vector")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "cell_volumes", omega)
        _check_algebra(entries, omega)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class GroupMatrix:
    """Omega-orthogonal, signed-stochastic matrix (a discrete diffeomorphism)."""

    entries: np.ndarray
    cell_volumes: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        omega = np.asarray(self.cell_volumes, dtype=float)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "cell_volumes", omega)
        _check_group(entries, omega)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def inverse(self) -> "GroupMatrix":
        # q^T Omega q = Omega  =>  q^-1 = Omega^-1 q^T Omega
        omega = self.cell_volumes
        inv = (self.entries.T * omega[None, :]) / omega[:, None]
        return GroupMatrix(inv, omega)


@dataclass(frozen=True)
class SemidirectAlgebraElement:
    """Element (A, omega) of the semidirect-product Lie algebra."""

    matrix_part: AlgebraMatrix
    vector_part: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector_part, dtype=float)
        if vec.shape != (self.matrix_part.n,):
            raise ValueError("vector_part must be an N-vector")
        object.__setattr__(self, "vector_part", vec)


@dataclass(frozen=True)
class SemidirectGroupElement:
    """Element (q, theta) of the semidirect-product group.

    theta is stored unwrapped; reduce modulo 2*pi only when reporting
    S^1-valued quantities.
    """

    matrix_part: GroupMatrix
    vector_part: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector_part, dtype=float)
        if vec.shape != (self.matrix_part.n,):
            raise ValueError("vector_part must be an N-vector")
        object.__setattr__(self, "vector_part", vec)


# ---------------------------------------------------------------------------
# Cayley transform and its trivialized tangents
# ---------------------------------------------------------------------------


def _cayley_raw(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    m = np.eye(n) - 0.5 * a
    if np.linalg.cond(m) > 1e12:
        raise SingularMatrix("I - A/2 is numerically singular")
    return np.linalg.solve(m, np.eye(n) + 0.5 * a)


def cayley(a: AlgebraMatrix | np.ndarray) -> GroupMatrix | np.ndarray:
    """Cayley transform (I - A/2)^-1 (I + A/2).

    Maps Omega-antisymmetric row-null matrices into the group of
    Omega-orthogonal signed-stochastic matrices; also valid on plain
    antisymmetric matrices such as so(3) elements.
    """
    if isinstance(a, AlgebraMatrix):
        return GroupMatrix(_cayley_raw(a.entries), a.cell_volumes)
    return _cayley_raw(np.asarray(a, dtype=float))


def cayley_inv(q: GroupMatrix | np.ndarray) -> np.ndarray:
    """Inverse Cayley transform: 2 (q - I)(q + I)^-1."""
    qm = q.entries if isinstance(q, GroupMatrix) else np.asarray(q, dtype=float)
    n = qm.shape[0]
    m = qm + np.eye(n)
    if np.linalg.cond(m) > 1e12:
        raise SingularMatrix("q + I is numerically singular")
    # (q - I)(q + I)^-1 == (q + I)^-1 (q - I); solve from the right.
    return 2.0 * np.linalg.solve(m.T, (qm - np.eye(n)).T).T


def dcay_inv(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Inverse right-trivialized tangent of cay: (I - Y/2) Z (I + Y/2)."""
    n = y.shape[0]
    eye = np.eye(n)
    return (eye - 0.5 * y) @ z @ (eye + 0.5 * y)


def dcay(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Right-trivialized tangent of cay: (I - Y/2)^-1 W (I + Y/2)^-1."""
    n = y.shape[0]
    eye = np.eye(n)
    return np.linalg.solve(eye - 0.5 * y, np.linalg.solve((eye + 0.5 * y).T, w.T).T)


def dcay_inv_star(y: np.ndarray, x_flat: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Dual of dcay_inv: (I + Y/2) X^flat Omega (I - Y/2) Omega^-1."""
    n = y.shape[0]
    eye = np.eye(n)
    m = (eye + 0.5 * y) @ (x_flat * omega[None, :]) @ (eye - 0.5 * y)
    return m / omega[None, :]


def dcay_star(y: np.ndarray, x_flat: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Dual of dcay: (I + Y/2)^-1 X^flat Omega (I - Y/2)^-1 Omega^-1."""
    n = y.shape[0]
    eye = np.eye(n)
    m = np.linalg.solve(eye + 0.5 * y, np.linalg.solve((eye - 0.5 * y).T, (x_flat * omega[None, :]).T).T)
    return m / omega[None, :]


def pairing(c_flat: np.ndarray, b: np.ndarray, omega: np.ndarray) -> float:
    """Omega-weighted Frobenius pairing Tr(C^flat^T Omega B)."""
    return float(np.sum(c_flat * (omega[:, None] * b)))


def pairing_scalar(pi: np.ndarray, psi: np.ndarray, omega: np.ndarray) -> float:
    """Omega-weighted pairing of discrete zero-forms: pi^T Omega psi."""
    return float(np.sum(pi * omega * psi))


# ---------------------------------------------------------------------------
# Semidirect-product exponential and group difference map
# ---------------------------------------------------------------------------


def _phi_series(a: np.ndarray, t: float) -> np.ndarray:
    """A^-1 (I - e^{-tA}) evaluated as t I - t^2 A/2 + t^3 A^2/6 - ...

    The series form stays valid for singular A.  Terms are added until
    they fall below 1e-15 of the partial sum.
    """
    n = a.shape[0]
    term = t * np.eye(n)
    total = term.copy()
    for k in range(2, 200):
        term = term @ a * (-t / k)
        total += term
        if np.abs(term).max() <= 1e-15 * max(1.0, np.abs(total).max()):
            break
    return total


def semidirect_exp(a: AlgebraMatrix, omega_vec: np.ndarray, t: float = 1.0) -> SemidirectGroupElement:
    """Exponential on the semidirect product: (e^{tA}, A^-1 (I - e^{-tA}) omega)."""
    mat = scipy.linalg.expm(t * a.entries)
    theta = _phi_series(a.entries, t) @ np.asarray(omega_vec, dtype=float)
    return SemidirectGroupElement(GroupMatrix(mat, a.cell_volumes), theta)


def _sqrt_group(q: np.ndarray) -> np.ndarray:
    """Principal square root of a group matrix near the identity."""
    s = scipy.linalg.sqrtm(q)
    if np.iscomplexobj(s):
        if np.abs(s.imag).max() > 1e-10:
            raise SingularMatrix("group matrix has no real principal square root")
        s = s.real
    return s


def semidirect_tau(a: AlgebraMatrix, omega_vec: np.ndarray) -> SemidirectGroupElement:
    """Cayley-based group difference map on the semidirect product.

    Returns (cay(A), s(A) omega) with s(A) the principal square root of
    cay(-A).  s(A) equals cay(-A/2) up to O(A^3) and makes the exact
    inverse identity tau(A, w)^-1 = tau(-A, -w) hold, which the plain
    cay(-A/2) factor only satisfies to cubic order.
    """
    q = cayley(a)
    s = _sqrt_group(_cayley_raw(-a.entries))
    return SemidirectGroupElement(q, s @ np.asarray(omega_vec, dtype=float))


def semidirect_product(g1: SemidirectGroupElement, g2: SemidirectGroupElement) -> SemidirectGroupElement:
    """Group product (q1, th1)(q2, th2) = (q1 q2, q2^-1 th1 + th2)."""
    q1, q2 = g1.matrix_part, g2.matrix_part
    q = GroupMatrix(q1.entries @ q2.entries, q1.cell_volumes)
    theta = q2.inverse().entries @ g1.vector_part + g2.vector_part
    return SemidirectGroupElement(q, theta)


def semidirect_inverse(g: SemidirectGroupElement) -> SemidirectGroupElement:
    """Group inverse (q, th)^-1 = (q^-1, -q th)."""
    return SemidirectGroupElement(g.matrix_part.inverse(), -(g.matrix_part.entries @ g.vector_part))


def semidirect_dtau_inv(
    a: np.ndarray, omega_vec: np.ndarray, b: np.ndarray, psi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Inverse right-trivialized tangent of the semidirect difference map.

    (B, psi) |-> (dcay^-1_A B, cay(-A/2) psi + 1/2 dcay_{A/2}(dcay^-1_A B) omega)
    """
    mat = dcay_inv(a, b)
    vec = _cayley_raw(-0.5 * a) @ psi + 0.5 * dcay(0.5 * a, mat) @ omega_vec
    return mat, vec


def semidirect_dtau_inv_star(
    a: np.ndarray,
    omega_vec: np.ndarray,
    c_flat: np.ndarray,
    pi: np.ndarray,
    omega_cells: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Dual of semidirect_dtau_inv with respect to the weighted pairings.

    When pi is a scalar multiple of omega_vec the skew term vanishes and
    the result reduces to ((dcay^-1_A)* C^flat, cay(A/2) pi).
    """
    skew = 0.5 * (np.outer(pi, omega_vec) - np.outer(omega_vec, pi))
    extra = dcay_inv_star(a, dcay_star(0.5 * a, skew, omega_cells), omega_cells)
    mat = dcay_inv_star(a, c_flat, omega_cells) + 0.5 * extra
    vec = _cayley_raw(0.5 * a) @ pi
    return mat, vec


# ---------------------------------------------------------------------------
# Newton solver and the generic discrete Euler-Poincare step
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NewtonConfig:
    """Damped Newton settings for the implicit momentum solve."""

    residual_tol: float = 1e-12
    max_iter: int = 50
    fd_step: float = 1e-7

    def __post_init__(self):
        if self.residual_tol <= 0 or self.max_iter < 1:
            raise ValueError("tolerances must be positive, iteration caps >= 1")


def newton_solve(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    config: NewtonConfig = NewtonConfig(),
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    """Damped Newton iteration on a flattened residual.

    Falls back to a central finite-difference Jacobian when no analytic
    one is supplied.  Backtracks by halving until the residual norm
    decreases.
    """
    x = np.array(x0, dtype=float).ravel()
    shape = np.shape(x0)

    def f(v: np.ndarray) -> np.ndarray:
        return np.asarray(residual(v.reshape(shape)), dtype=float).ravel()

    r = f(x)
    for _ in range(config.max_iter):
        rnorm = np.abs(r).max(initial=0.0)
        if rnorm <= config.residual_tol:
            return x.reshape(shape)
        if jacobian is not None:
            jac = np.asarray(jacobian(x.reshape(shape)), dtype=float).reshape(x.size, x.size)
        else:
            jac = np.empty((x.size, x.size))
            h = config.fd_step * max(1.0, np.abs(x).max(initial=0.0))
            for i in range(x.size):
                xp = x.copy()
                xm = x.copy()
                xp[i] += h
                xm[i] -= h
                jac[:, i] = (f(xp) - f(xm)) / (2 * h)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        lam = 1.0
        while lam >= 2.0 ** -20:
            xn = x + lam * step
            rn = f(xn)
            if np.abs(rn).max(initial=0.0) < rnorm:
                x, r = xn, rn
                break
            lam *= 0.5
        else:
            break  # no descent direction: give the caller the residual
    rnorm = np.abs(r).max(initial=0.0)
    if rnorm > config.residual_tol:
        raise NoConvergence("Newton iteration stalled", residual=rnorm, iterations=config.max_iter)
    return x.reshape(shape)


@dataclass(frozen=True)
class TauCalculus:
    """Group difference map bundle used by :func:`dep_step`.

    tau maps an algebra element (any ndarray parameterization) to an
    opaque group element; compose multiplies group elements; advect
    applies a group element to an advected parameter, honoring the
    chosen left/right convention.
    """

    tau: Callable[[np.ndarray], object]
    dtau_inv_star: Callable[[np.ndarray, np.ndarray], np.ndarray]
    compose: Callable[[object, object], object]
    advect: Callable[[object, object], object]


def dep_step(
    state: tuple[object, np.ndarray, object],
    h: float,
    dl_dxi: Callable[[np.ndarray], np.ndarray],
    calculus: TauCalculus,
    dl_da: Optional[Callable[[np.ndarray, object], object]] = None,
    diamond: Optional[Callable[[object, object], np.ndarray]] = None,
    convention: Literal["left", "right"] = "right",
    solver: NewtonConfig = NewtonConfig(),
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> tuple[object, np.ndarray, object]:
    """One step of the discrete Euler-Poincare equations with advection.

    Left-left convention:

        g' = g tau(h xi),  a' = tau(-h xi) a,
        (dtau^-1_{h xi'})* dl/dxi' = (dtau^-1_{-h xi})* dl/dxi + h (dl/da') <> a'

    Right-right flips the signs of the arguments of dtau^-1* and acts on
    the other side:

        g' = tau(h xi) g,  a' = a tau(-h xi),
        (dtau^-1_{-h xi'})* dl/dxi' = (dtau^-1_{h xi})* dl/dxi + h (dl/da') <> a'

    The advected parameter and group element are opaque; the calculus
    bundle supplies the group operations.  xi' is found by damped Newton
    on the momentum residual (warm-started at xi).

    xi must be an intrinsic parameterization of the Lie algebra (e.g. a
    3-vector for so(3), or basis coefficients for a matrix algebra), with
    dl_dxi/dtau_inv_star mapping consistently between it and the dual
    representation: Newton solves component-wise in those coordinates, so
    an over-parameterized xi would drift off the algebra.
    """
    g, xi, a = state
    xi = np.asarray(xi, dtype=float)
    step_el = calculus.tau(h * xi)
    back_el = calculus.tau(-h * xi)
    if convention == "left":
        g_next = calculus.compose(g, step_el)
        a_next = calculus.advect(a, back_el) if a is not None else None
        sign_new, sign_old = +1.0, -1.0
    else:
        g_next = calculus.compose(step_el, g)
        a_next = calculus.advect(a, back_el) if a is not None else None
        sign_new, sign_old = -1.0, +1.0

    rhs = calculus.dtau_inv_star(sign_old * h * xi, dl_dxi(xi))
    if a_next is not None and diamond is not None and dl_da is not None:
        forcing_of = lambda xi_n: h * diamond(dl_da(xi_n, a_next), a_next)
    else:
        forcing_of = lambda xi_n: 0.0

    def residual(xi_n: np.ndarray) -> np.ndarray:
        return calculus.dtau_inv_star(sign_new * h * xi_n, dl_dxi(xi_n)) - rhs - forcing_of(xi_n)

    xi_next = newton_solve(residual, xi, config=solver, jacobian=jacobian)
    return g_next, xi_next, a_next


# ---------------------------------------------------------------------------
# Test helpers
# ---------------------------------------------------------------------------


def random_algebra_matrix(n: int, omega: np.ndarray, rng: np.random.Generator, scale: float = 1.0) -> AlgebraMatrix:
    """Random Omega-antisymmetric row-null matrix: Omega^-1 (Q K Q) with K skew."""
    k = rng.standard_normal((n, n))
    k = k - k.T
    q = np.eye(n) - np.ones((n, n)) / n
    k = q @ k @ q
    return AlgebraMatrix(scale * (k / omega[:, None]), omega)
