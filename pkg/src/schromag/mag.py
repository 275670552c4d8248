"""Momentum-accelerated gradient solver for A u = b.

The heavy-ball recursion

    u_{n+1} = u_n + alpha (A^H b - A^H A u_n) + beta (u_n - u_{n-1})

is run in transformed 2n-dimensional variables w_n = [(1-beta) u_n;
sqrt(alpha*beta) A u_{n-1}], whose one-step map w -> H w + F has a
negative-definite Hermitian part gap and spectral radius sqrt(beta) when
the declared bounds bracket the spectrum of A^H A.  Conjugate transpose
replaces plain transpose so the complex Robin problems go through the
same path; the two coincide for real data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, SpectrumBoundsError
from .linalg import (
    LinearSystem,
    as_cmatrix,
    as_cvector,
    direct_solve,
    eig,
    hermitian_part,
    require_square,
)

# eig on the boundary-degenerate (Jordan) case is only sqrt(eps)-accurate,
# so the radius check tolerates ~1e-7 there; genuine bound violations move
# the radius by orders of magnitude more
SPECTRAL_RADIUS_TOL = 1e-6


@dataclass(frozen=True)
class MagParams:
    """Step size / momentum derived from spectrum bounds of A^H A.

    l_hat bounds sigma_max^2 from above, mu_hat bounds sigma_min^2 from
    below (strictly positive).  kappa_hat = sqrt(l_hat/mu_hat).
    """

    l_hat: float
    mu_hat: float
    alpha: float
    beta: float
    kappa_hat: float

    def __post_init__(self):
        if not (0.0 < self.mu_hat <= self.l_hat):
            raise ValueError(
                f"need 0 < mu_hat <= l_hat, got ({self.l_hat}, {self.mu_hat})"
            )
        assert self.alpha == 4.0 / (math.sqrt(self.l_hat) + math.sqrt(self.mu_hat)) ** 2
        assert self.beta == ((self.kappa_hat - 1.0) / (self.kappa_hat + 1.0)) ** 2
        assert 0.0 <= self.beta < 1.0
        # equality alpha == 1/mu_hat at l_hat == mu_hat, up to rounding
        assert 0.0 < self.alpha <= (1.0 + 4e-16) / self.mu_hat


def derive_params(l_hat: float, mu_hat: float) -> MagParams:
    """Optimal-rate step size and momentum for bounds (l_hat, mu_hat)."""
    if not (0.0 < mu_hat <= l_hat) or not (math.isfinite(l_hat) and math.isfinite(mu_hat)):
        raise ValueError(f"need 0 < mu_hat <= l_hat, got ({l_hat}, {mu_hat})")
    kappa_hat = math.sqrt(l_hat / mu_hat)
    alpha = 4.0 / (math.sqrt(l_hat) + math.sqrt(mu_hat)) ** 2
    beta = ((kappa_hat - 1.0) / (kappa_hat + 1.0)) ** 2
    return MagParams(l_hat=l_hat, mu_hat=mu_hat, alpha=alpha, beta=beta, kappa_hat=kappa_hat)


def params_from_matrix(a, safety: float = 1.0) -> MagParams:
    """Bounds taken from the actual singular values, widened by `safety`."""
    s = np.linalg.svd(as_cmatrix(a), compute_uv=False)
    return derive_params((safety * s[0]) ** 2, (s[-1] / safety) ** 2)


@dataclass(frozen=True)
class TransformedSystem:
    """The pair (H, F) of the transformed one-step map, plus provenance."""

    h: np.ndarray
    f: np.ndarray
    n: int
    params: MagParams
    a: np.ndarray
    b: np.ndarray

    def reconstruct_h(self) -> np.ndarray:
        """Rebuild H from the stored A and parameters (invariant check)."""
        return _h_blocks(self.a, self.params)

    def hermitian_gap(self) -> float:
        """Largest eigenvalue of (H + H^H)/2 - I; negative for valid builds."""
        m = hermitian_part(self.h) - np.eye(2 * self.n)
        return float(np.max(np.linalg.eigvalsh(m)))


def _h_blocks(a: np.ndarray, p: MagParams) -> np.ndarray:
    n = a.shape[0]
    ah = a.conj().T
    c = math.sqrt(p.alpha * p.beta)
    h = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    h[:n, :n] = np.eye(n) - p.alpha * (ah @ a)
    h[:n, n:] = -c * ah
    h[n:, :n] = c * a
    h[n:, n:] = p.beta * np.eye(n)
    return h


def build_transformed(a, b, params: MagParams) -> TransformedSystem:
    a = require_square(as_cmatrix(a))
    b = as_cvector(b)
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"rhs length {b.shape[0]} != matrix dimension {n}")
    h = _h_blocks(a, params)
    f = np.zeros(2 * n, dtype=np.complex128)
    f[:n] = params.alpha * (a.conj().T @ b)
    return TransformedSystem(h=h, f=f, n=n, params=params, a=a, b=b)


def steady_state(sys: TransformedSystem) -> np.ndarray:
    """Fixed point (I - H)^{-1} F.

    First block equals (1-beta) times the least-squares solution; for
    invertible square A the second block equals sqrt(alpha*beta) b, which
    serves as a built-in validation value.
    """
    m = np.eye(2 * sys.n) - sys.h
    return direct_solve(LinearSystem(m, sys.f))


@dataclass
class IterationTrace:
    steps: int
    states: list  # w_n per step when recorded, else []
    residuals: list  # ||Delta w_n|| / ||Delta w_0||
    relative_residuals: list | None = None
    converged: bool = True
    w_final: np.ndarray = field(default=None, repr=False)


def mag_iterate(
    sys: TransformedSystem,
    w0,
    delta: float,
    max_steps: int,
    use_steady: bool = True,
    keep_states: bool = True,
) -> IterationTrace:
    """Run w <- H w + F until the error contracts below delta.

    Termination measures ||w_n - w_inf|| / ||w_0 - w_inf|| against the
    computable steady state; with use_steady=False it falls back to the
    step-to-step residual ||w_{n+1} - w_n|| / ||w_n||.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must be in (0,1), got {delta}")
    w = as_cvector(w0).copy()
    if w.shape[0] != 2 * sys.n:
        raise ValueError(f"w0 must have dimension {2 * sys.n}")

    w_inf = steady_state(sys) if use_steady else None
    if use_steady:
        denom = np.linalg.norm(w - w_inf)
        if denom == 0.0:
            return IterationTrace(0, [w.copy()] if keep_states else [], [1.0], w_final=w)
        measure = lambda wn, wp: np.linalg.norm(wn - w_inf) / denom
    else:
        measure = lambda wn, wp: np.linalg.norm(wn - wp) / max(np.linalg.norm(wp), 1e-300)

    states = [w.copy()] if keep_states else []
    residuals = [1.0]
    for _ in range(max_steps):
        w_prev = w
        w = sys.h @ w + sys.f
        residuals.append(float(measure(w, w_prev)))
        if keep_states:
            states.append(w.copy())
        if residuals[-1] < delta:
            return IterationTrace(
                steps=len(residuals) - 1,
                states=states,
                residuals=residuals,
                w_final=w,
            )
    raise ConvergenceError(
        f"no convergence to {delta:g} within {max_steps} steps "
        f"(final residual {residuals[-1]:.3e})",
        residual=residuals[-1],
    )


def solution_from_state(sys: TransformedSystem, w: np.ndarray) -> np.ndarray:
    """Extract u from a transformed state: first block over (1 - beta)."""
    beta = sys.params.beta
    if beta >= 1.0:
        raise ValueError("beta must be < 1")
    return w[: sys.n] / (1.0 - beta)


def solution_error_factor(sys: TransformedSystem) -> float:
    """Bound on (max-norm relative u error) / (transformed-state residual).

    The termination criterion contracts ||w - w_inf|| / ||w_inf||; after
    unscaling the first block the max-norm error relative to u picks up
    at most ||w_inf||_2 / max|w_inf(u block)|.
    """
    w_inf = steady_state(sys)
    top = float(np.max(np.abs(w_inf[: sys.n])))
    if top == 0.0:
        return 1.0
    return max(float(np.linalg.norm(w_inf)) / top, 1.0)


def lambda_pm(sigma: float, p: MagParams) -> tuple[complex, complex]:
    """Both one-step eigenvalues attached to a singular value sigma."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    trace = 1.0 + p.beta - p.alpha * sigma**2
    disc = complex(trace * trace - 4.0 * p.beta)
    root = np.sqrt(disc)
    return ((trace + root) / 2.0, (trace - root) / 2.0)


def spectral_radius_check(sys: TransformedSystem) -> float:
    """max |eig(H)|, asserted equal to sqrt(beta) within 1e-8."""
    rho = float(np.max(np.abs(eig(sys.h).values)))
    expected = math.sqrt(sys.params.beta)
    if abs(rho - expected) > SPECTRAL_RADIUS_TOL:
        raise SpectrumBoundsError(
            f"spectral radius {rho:.12f} != sqrt(beta) {expected:.12f}; "
            "declared bounds do not bracket the spectrum of A^H A"
        )
    return rho


def convergence_steps(kappa_hat: float, delta: float, safety: float = 1.0) -> int:
    """Sufficient step count ceil(safety * kappa_hat * ln(1/delta))."""
    if kappa_hat < 1.0:
        raise ValueError("kappa_hat must be >= 1")
    if not (0.0 < delta < 1.0):
        raise ValueError("delta must be in (0,1)")
    return math.ceil(safety * kappa_hat * math.log(1.0 / delta))


NEAR_ZERO_FACTOR = 1e-12


def relative_trace_from_steady(w_inf: np.ndarray, states) -> tuple[list | None, float]:
    """Componentwise-normalized residual trace and kappa_2(w_inf).

    Errors are divided by the matching steady-state component, so the
    trace is only well posed when no component of w_inf sits near zero;
    in that case kappa_2 is reported as infinite and no values are
    produced (this is exactly the failure mode of the damped dynamics,
    whose auxiliary steady state vanishes).
    """
    w_inf = as_cvector(w_inf)
    mags = np.abs(w_inf)
    threshold = NEAR_ZERO_FACTOR * np.linalg.norm(w_inf)
    if np.min(mags) <= threshold:
        return None, math.inf
    kappa2 = float(np.max(mags) / np.min(mags))
    hats = [np.linalg.norm((w - w_inf) / w_inf) for w in states]
    denom = hats[0] if hats and hats[0] > 0 else 1.0
    return [h / denom for h in hats], kappa2


def relative_trace(sys: TransformedSystem, trace: IterationTrace) -> tuple[list | None, float]:
    if not trace.states:
        raise ValueError("trace was recorded without states; rerun with keep_states=True")
    values, kappa2 = relative_trace_from_steady(steady_state(sys), trace.states)
    trace.relative_residuals = values
    return values, kappa2
