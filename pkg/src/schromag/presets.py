"""Catalogue of figure presets: PDE problems plus solver configuration.

Each entry reproduces the data behind one benchmark panel.  Solver
settings (delta, auxiliary-grid size, damped coupling) live here so a
preset run is fully determined by its name.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .pde import MIXED, ROBIN, ZERO, PdeProblem, make_problem


@dataclass(frozen=True)
class SolverConfig:
    delta: float = 1e-3
    n_p: int = 2048
    gamma: float | None = None  # damped coupling; default derived from sigma_min
    bounds_safety: float = 1.0  # widen exact singular-value bounds by this factor
    recovery: str = "integral"
    notes: str = ""


# family, n, k, forcing, boundary, solver overrides
_PDE_TABLE = {
    "fig3a": ("helmholtz1d", 16, 2.0, "sine23", (ZERO,), {"n_p": 1024}),
    "fig3b": ("helmholtz1d", 32, 2.0, "sine23", (ZERO,), {"n_p": 1024}),
    "fig3c": ("helmholtz1d", 32, 4.0, "sine23", (ZERO,), {"n_p": 1024}),
    "fig3d": ("helmholtz1d", 16, 2.0, "cos2", (ROBIN, 2j), {"n_p": 65536}),
    "fig3e": ("helmholtz1d", 32, 2.0, "cos2", (ROBIN, 2j), {"n_p": 262144}),
    "fig3f": ("helmholtz1d", 32, 4.0, "cos2", (ROBIN, 2j), {"n_p": 262144}),
    "fig4a": ("helmholtz2d", 16, 1.0, "sine23_diag", (ZERO,), {"n_p": 16384}),
    "fig4d": ("helmholtz2d", 16, 1.0, "cos2_diag", (ROBIN, 2j), {"n_p": 32768}),
    "fig5a": ("biharmonic1d", 16, 0.0, "sine23", (ZERO,), {"n_p": 1024}),
    "fig5b": ("biharmonic1d", 32, 0.0, "sine23", (ZERO,), {"n_p": 2048}),
    "fig5c": ("biharmonic1d", 16, 0.0, "cos2", (MIXED, 2.0), {"n_p": 32768}),
    "fig5d": ("biharmonic1d", 32, 0.0, "cos2", (MIXED, 2.0), {"n_p": 131072}),
    "fig6a": ("biharmonic2d", 16, 0.0, "sine23_diag", (ZERO,), {"n_p": 16384}),
    "fig6d": ("biharmonic2d", 16, 0.0, "cos2_diag", (MIXED, 2.0), {"n_p": 32768}),
}

PDE_PRESET_NAMES = tuple(sorted(_PDE_TABLE))


def pde_preset(name: str) -> tuple[PdeProblem, SolverConfig]:
    try:
        family, n, k, forcing, boundary, overrides = _PDE_TABLE[name]
    except KeyError:
        raise InputError(
            f"unknown preset {name!r}; available: {', '.join(PDE_PRESET_NAMES)}"
        ) from None
    problem = make_problem(family, n, k, forcing, boundary)
    return problem, SolverConfig(**overrides)


@dataclass(frozen=True)
class ComparePreset:
    """Head-to-head setup for the auxiliary-variable comparisons."""

    name: str
    a: np.ndarray
    b: np.ndarray
    l_hat: float
    mu_hat: float
    gamma: float
    t_end: float
    samples: int
    deltas: tuple = ()
    notes: str = ""


def compare_preset(name: str) -> ComparePreset:
    if name == "fig1":
        # Bounds must bracket the true singular values {0.1, 10}.  The
        # quoted setting sigma_max_hat = 5*1.05, sigma_min_hat = 5*0.95
        # cannot bracket that spectrum, so the bracketing reading
        # (10*1.05, 0.1*0.95) is used; the literal values stay recorded
        # in this comment for reference.
        sig_max_hat = 10.0 * 1.05
        sig_min_hat = 0.1 * 0.95
        return ComparePreset(
            name="fig1",
            a=np.diag([10.0, 0.1]).astype(np.complex128),
            b=np.array([1.0, 1.0], dtype=np.complex128),
            l_hat=sig_max_hat**2,
            mu_hat=sig_min_hat**2,
            gamma=2.0 * sig_min_hat,
            t_end=60.0,
            samples=1200,
            notes="auxiliary/solved ratio comparison on diag([10, 0.1])",
        )
    if name == "fig2":
        # 1d Poisson reading: u''(x) = f(x), f = 2 sin(2 pi x), n = 16,
        # zero boundary, accuracy targets n^{-1/2} .. n^{-2}.
        n = 16
        problem = make_problem("helmholtz1d", n, 0.0, "sine2", (ZERO,))
        s = np.linalg.svd(problem.system.a, compute_uv=False)
        return ComparePreset(
            name="fig2",
            a=problem.system.a,
            b=problem.system.b,
            l_hat=float(s[0]) ** 2,
            mu_hat=float(s[-1]) ** 2,
            gamma=1.9 * float(s[-1]),
            t_end=0.0,  # per-delta horizons are derived at run time
            samples=0,
            deltas=tuple(float(n) ** (-e) for e in (0.5, 1.0, 1.5, 2.0)),
            notes="terminal-error comparison on the 1d Poisson problem",
        )
    raise InputError(f"unknown compare preset {name!r}; available: fig1, fig2")
