"""Fixed-step integration and finite differencing.

The integrator is classical fourth-order Runge-Kutta with a fixed step:
the flow fields are Lipschitz on a compact box, and a fixed step keeps CSV
outputs bit-reproducible, which an adaptive scheme would not. States are
clamped into the box after every step; the clamp is a numerical guard, the
dynamics themselves keep trajectories inside (tests check how much the
clamp ever moves a state).

The Jacobian helper uses per-coordinate central differences. Every
nondifferentiability in the flow models comes from an explicit min, so
kinks are detected exactly: a coordinate's column is masked when the
active-branch fingerprint differs between x - r*e_j and x + r*e_j, r being
the exclusion radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class NonFiniteState(RuntimeError):
    """A field evaluation produced NaN or infinity."""


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: one row per integrator step, first row the initial
    state. max_clamp records the largest box-clamp correction applied."""

    times: np.ndarray
    states: np.ndarray
    dt: float
    method: str = "rk4"
    max_clamp: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class FdSpec:
    """Central-difference step and kink-exclusion radius, scalars or
    per-coordinate arrays. The radius must dominate the step so a branch
    switch inside the difference stencil is always detected."""

    step: np.ndarray | float
    kink_exclusion_radius: np.ndarray | float

    def __post_init__(self) -> None:
        step = np.asarray(self.step, dtype=float)
        radius = np.asarray(self.kink_exclusion_radius, dtype=float)
        if np.any(step <= 0):
            raise ValueError("finite-difference step must be positive")
        if np.any(radius < step):
            raise ValueError("kink exclusion radius must be >= step")
        object.__setattr__(self, "step", step)
        object.__setattr__(self, "kink_exclusion_radius", radius)

    @classmethod
    def for_box(
        cls,
        upper: np.ndarray,
        step_scale: float = 1e-6,
        radius_scale: float = 1e-4,
    ) -> "FdSpec":
        upper = np.asarray(upper, dtype=float)
        return cls(step=step_scale * upper, kink_exclusion_radius=radius_scale * upper)

    def step_for(self, n: int) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.step, dtype=float), (n,))

    def radius_for(self, n: int) -> np.ndarray:
        return np.broadcast_to(
            np.asarray(self.kink_exclusion_radius, dtype=float), (n,)
        )


def integrate(
    field: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    t_final: float,
    dt: float,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
) -> Trajectory:
    """RK4 with fixed step dt from t=0 to t_final, sampling every step.

    A final shorter step is taken when t_final is not a multiple of dt.
    Raises NonFiniteState as soon as any evaluation goes non-finite.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")

    x = np.array(x0, dtype=float)
    n_full = int(t_final / dt + 1e-9)
    remainder = t_final - n_full * dt
    if remainder < 1e-12 * max(1.0, t_final):
        remainder = 0.0

    times = [0.0]
    states = [x.copy()]
    max_clamp = 0.0

    def step(xc: np.ndarray, h: float) -> tuple[np.ndarray, float]:
        k1 = field(xc)
        k2 = field(xc + (0.5 * h) * k1)
        k3 = field(xc + (0.5 * h) * k2)
        k4 = field(xc + h * k3)
        nxt = xc + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(nxt)):
            raise NonFiniteState("integration produced a non-finite state")
        clamp = 0.0
        if lower is not None or upper is not None:
            clamped = nxt
            if lower is not None:
                clamped = np.maximum(clamped, lower)
            if upper is not None:
                clamped = np.minimum(clamped, upper)
            clamp = float(np.max(np.abs(clamped - nxt))) if len(nxt) else 0.0
            nxt = clamped
        return nxt, clamp

    for i in range(n_full):
        x, c = step(x, dt)
        max_clamp = max(max_clamp, c)
        times.append((i + 1) * dt)
        states.append(x.copy())
    if remainder > 0.0:
        x, c = step(x, remainder)
        max_clamp = max(max_clamp, c)
        times.append(t_final)
        states.append(x.copy())

    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        dt=dt,
        max_clamp=max_clamp,
    )


def jacobian_fd(
    func: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    spec: FdSpec,
    signature: Optional[Callable[[np.ndarray], tuple]] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobian of func at x with a kink mask.

    Returns (J, mask) where J[i, j] approximates d func_i / d x_j and
    mask[i, j] is True when coordinate j's probes straddle a branch switch
    (detected via `signature`, when given). Masked entries still carry the
    raw difference quotient; callers decide what to do with them. x must be
    interior to the domain by at least the step in each coordinate.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    h = spec.step_for(n)
    r = spec.radius_for(n)

    cols = []
    masked_cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        fp = np.asarray(func(x + h[j] * e), dtype=float)
        fm = np.asarray(func(x - h[j] * e), dtype=float)
        cols.append((fp - fm) / (2.0 * h[j]))
        if signature is not None:
            masked_cols.append(signature(x + r[j] * e) != signature(x - r[j] * e))
        else:
            masked_cols.append(False)

    J = np.column_stack(cols)
    mask = np.zeros_like(J, dtype=bool)
    for j, m in enumerate(masked_cols):
        if m:
            mask[:, j] = True
    return J, mask
