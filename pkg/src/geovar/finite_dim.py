"""Reference finite-dimensional integrators: free rigid body and heavy top.

Both are discrete Euler-Poincare integrators on SO(3) with the Cayley
transform as group difference map (left-left convention), exercising the
same temporal discretization used for the grid models.  The rigid body
conserves a discrete spatial angular momentum exactly; the heavy top
conserves its e3 component.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .lie_core import NewtonConfig, TauCalculus, dep_step

__all__ = [
    "RigidBodyState",
    "HeavyTopState",
    "hat",
    "unhat",
    "cayley_so3",
    "so3_calculus",
    "rigid_step",
    "heavy_top_step",
    "spatial_momentum",
    "rigid_energy",
    "heavy_top_energy",
]


def hat(v: np.ndarray) -> np.ndarray:
    """3-vector to antisymmetric matrix, hat(v) w = v x w."""
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def unhat(m: np.ndarray) -> np.ndarray:
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def cayley_so3(v: np.ndarray) -> np.ndarray:
    """Closed-form Cayley transform of hat(v): rotation by 2 atan(|v|/2)."""
    vh = hat(v)
    return np.eye(3) + (vh + 0.5 * (vh @ vh)) / (1.0 + 0.25 * float(v @ v))


def _dtau_inv_star_vec(xi0: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """(dcay^-1_{hat(xi0)})* hat(mu) in vector form under the dot pairing."""
    return mu + 0.5 * np.cross(xi0, mu) + 0.25 * float(xi0 @ mu) * xi0


@dataclass(frozen=True)
class RigidBodyState:
    """Attitude R, body angular velocity Omega, principal moments inertia."""

    rotation: np.ndarray
    omega: np.ndarray
    inertia: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        w = np.asarray(self.omega, dtype=float)
        inertia = np.asarray(self.inertia, dtype=float)
        if np.abs(r.T @ r - np.eye(3)).max() > 1e-10 or abs(np.linalg.det(r) - 1.0) > 1e-10:
            raise ValueError("rotation is not in SO(3) to 1e-10")
        if (inertia <= 0).any():
            raise ValueError("principal moments must be positive")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "inertia", inertia)


@dataclass(frozen=True)
class HeavyTopState(RigidBodyState):
    """Rigid body plus advected gravity direction and top parameters.

    gamma is the gravity direction seen from the body frame; chi the unit
    vector from the fixed point toward the center of mass.
    """

    gamma: np.ndarray
    mass: float
    gravity: float
    length: float
    chi: np.ndarray

    def __post_init__(self):
        super().__post_init__()
        g = np.asarray(self.gamma, dtype=float)
        chi = np.asarray(self.chi, dtype=float)
        if abs(np.linalg.norm(g) - 1.0) > 1e-10:
            raise ValueError("gamma must be a unit vector to 1e-10")
        if abs(np.linalg.norm(chi) - 1.0) > 1e-12:
            raise ValueError("chi must be a unit vector")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "chi", chi)

    @property
    def mgl(self) -> float:
        return self.mass * self.gravity * self.length


def so3_calculus() -> TauCalculus:
    """so(3) calculus bundle for dep_step, left-left convention."""
    return TauCalculus(
        tau=cayley_so3,
        dtau_inv_star=_dtau_inv_star_vec,
        compose=lambda g, s: g @ s,
        advect=lambda a, el: el @ a,
    )


def _momentum_jacobian(inertia: np.ndarray, h: float):
    imat = np.diag(inertia)

    def jac(w: np.ndarray) -> np.ndarray:
        pi = inertia * w
        return (
            imat
            + 0.5 * h * (hat(w) @ imat - hat(pi))
            + 0.25 * h * h * (2.0 * np.outer(w, pi) + float(w @ pi) * np.eye(3))
        )

    return jac


def rigid_step(s: RigidBodyState, h: float, solver: NewtonConfig = NewtonConfig()) -> RigidBodyState:
    """Advance the free rigid body by one step of size h.

    R_{k+1} = R_k cay(h hat(Omega_k)); Omega_{k+1} solves the discrete
    momentum equation with the h^2/4 cubic terms retained.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    inertia = s.inertia
    g_next, w_next, _ = dep_step(
        (s.rotation, s.omega, None),
        h,
        dl_dxi=lambda w: inertia * w,
        calculus=so3_calculus(),
        convention="left",
        solver=solver,
        jacobian=_momentum_jacobian(inertia, h),
    )
    return RigidBodyState(g_next, w_next, inertia)


def heavy_top_step(s: HeavyTopState, h: float, solver: NewtonConfig = NewtonConfig()) -> HeavyTopState:
    """Advance the heavy top: gamma is advected by cay(-h hat(Omega_k))."""
    if h <= 0:
        raise ValueError("h must be positive")
    inertia, chi, mgl = s.inertia, s.chi, s.mgl
    g_next, w_next, gamma_next = dep_step(
        (s.rotation, s.omega, s.gamma),
        h,
        dl_dxi=lambda w: inertia * w,
        calculus=so3_calculus(),
        dl_da=lambda w, gam: -mgl * chi,
        diamond=lambda v, gam: np.cross(v, gam),
        convention="left",
        solver=solver,
        jacobian=_momentum_jacobian(inertia, h),
    )
    return replace(s, rotation=g_next, omega=w_next, gamma=gamma_next)


def spatial_momentum(s: RigidBodyState, h: float) -> np.ndarray:
    """Discrete spatial angular momentum R_k (dcay^-1_{h Omega_k})* Pi_k.

    Constant along rigid body trajectories; its e3 component is constant
    for the heavy top.  Approaches R I Omega as h -> 0.
    """
    pi = s.inertia * s.omega
    return s.rotation @ _dtau_inv_star_vec(h * s.omega, pi)


def rigid_energy(s: RigidBodyState) -> float:
    return 0.5 * float(s.inertia * s.omega @ s.omega)


def heavy_top_energy(s: HeavyTopState) -> float:
    return rigid_energy(s) + s.mgl * float(s.gamma @ s.chi)
