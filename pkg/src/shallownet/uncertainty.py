"""Mean-field observables and the macroscopic quantum-uncertainty functional.

The functional of interest is the maximum, over averaging observables
``abar = (1/n) sum_i embed(c, i)``, of the trace norm ``||[abar, rho]||_tr``.
Values of order 1 mean the state carries quantum uncertainty in a macroscopic
(mean-field) quantity; separable states stay at order ``1/sqrt(n)``, and a
depth-k network can raise the value by at most ``2^k``.

``estimate_e`` reports a certified lower bound: every reported value is the
trace norm actually achieved at the reported maximizer.  For qubits the
search runs over the Bloch sphere (deterministic Fibonacci grid, then a
projected subgradient ascent); for larger local dimensions it is a projected
ascent over traceless Hermitian site observables with spectral spread 1,
restarted from seeded random starts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import SIGMA_X, SIGMA_Y, SIGMA_Z
from .network import Network, apply
from .states import DensityState, SeparableInput, density_matrix, mix

SPREAD_ATOL = 1e-10
PURITY_ATOL = 1e-8
DEGENERACY_GAP = 1e-10


@dataclass(frozen=True)
class SiteObservable:
    """Single-site Hermitian observable, stored traceless with spread <= 1.

    The spectral spread (largest minus smallest eigenvalue) is capped at 1,
    which is the same feasible set as "some identity shift has norm <= 1/2":
    identity shifts change neither commutators nor variances.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = linalg.require_hermitian(self.matrix)
        l = m.shape[0]
        m = m - (np.trace(m) / l) * np.eye(l)
        eig = np.linalg.eigvalsh(m)
        spread = float(eig[-1] - eig[0])
        if spread > 1.0 + SPREAD_ATOL:
            raise ValueError(f"spectral spread {spread} exceeds 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_bloch(cls, v) -> "SiteObservable":
        """Qubit observable (v . sigma) / 2 for a Bloch vector with |v| <= 1."""
        v = np.asarray(v, dtype=float)
        return cls((v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z) / 2)

    @property
    def l(self) -> int:
        return self.matrix.shape[0]

    @property
    def spread(self) -> float:
        eig = np.linalg.eigvalsh(self.matrix)
        return float(eig[-1] - eig[0])

    def centered(self) -> np.ndarray:
        """Representative with the spectrum centered at 0, hence norm <= 1/2."""
        eig = np.linalg.eigvalsh(self.matrix)
        shift = (eig[-1] + eig[0]) / 2
        return self.matrix - shift * np.eye(self.l)


@dataclass(frozen=True)
class AveragingObservable:
    """Mean of the same site observable embedded at every site."""

    site: SiteObservable
    n: int

    def matrix(self) -> np.ndarray:
        return averaging_matrix(self.site, self.n)


def averaging_matrix(c, n: int) -> np.ndarray:
    """(1/n) sum over sites of the embedded (spectrum-centered) observable."""
    site = c if isinstance(c, SiteObservable) else SiteObservable(c)
    op = site.centered()
    l = site.l
    out = np.zeros((l**n, l**n), dtype=complex)
    for i in range(1, n + 1):
        out += linalg.embed(op, [i], n, l)
    return out / n


def _abar_matrix(abar, rho: np.ndarray) -> np.ndarray:
    if isinstance(abar, AveragingObservable):
        return abar.matrix()
    if isinstance(abar, SiteObservable):
        n = round(math.log(rho.shape[0], abar.l))
        return averaging_matrix(abar, n)
    return linalg.require_square(abar)


def variance(abar, rho) -> float:
    """tr(abar^2 rho) - tr(abar rho)^2, clamped to be nonnegative."""
    m = density_matrix(rho)
    a = _abar_matrix(abar, m)
    if a.shape != m.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {m.shape}")
    mean = float(np.real(np.trace(a @ m)))
    second = float(np.real(np.trace(a @ a @ m)))
    v = second - mean * mean
    if v < -1e-9:
        raise ValueError(f"variance {v} is negative beyond numerical tolerance")
    return max(v, 0.0)


def commutator_trace_norm(abar, rho) -> float:
    """Trace norm of [abar, rho]."""
    m = density_matrix(rho)
    a = _abar_matrix(abar, m)
    if a.shape != m.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {m.shape}")
    h = 1j * linalg.commutator(a, m)
    return float(np.sum(np.abs(np.linalg.eigvalsh(h))))


def commutator_witness(abar, rho):
    """Trace norm of [abar, rho] together with an attaining witness.

    Returns ``(value, b)`` with ``||b|| <= 1`` and ``tr(rho [abar, b])``
    equal to the value: b is ``-i sign(i [abar, rho])``, the polar-sign factor
    of the commutator.
    """
    m = density_matrix(rho)
    a = _abar_matrix(abar, m)
    h = 1j * linalg.commutator(a, m)
    eig, vec = np.linalg.eigh(h)
    b = -1j * (vec * np.sign(eig)) @ vec.conj().T
    return float(np.sum(np.abs(eig))), b


@dataclass(frozen=True)
class Hypersurface:
    """Level set of ``tr(rho [abar, b])`` at value r."""

    abar: AveragingObservable
    b: np.ndarray
    r: float

    def __post_init__(self):
        b = linalg.require_square(self.b)
        if linalg.operator_norm(b) > 1.0 + 1e-10:
            raise ValueError("witness operator must have norm at most 1")
        if not -1.0 - 1e-12 <= self.r <= 1.0 + 1e-12:
            raise ValueError(f"level {self.r} outside [-1, 1]")
        b = b.copy()
        b.setflags(write=False)
        object.__setattr__(self, "b", b)


def commutator_expectation(rho, abar, b) -> float:
    """Re tr(rho [abar, b]) for any witness with ||b|| <= 1.

    For Hermitian b the trace is purely imaginary and the value is 0; the
    meaningful witnesses are the polar-sign factors from
    ``commutator_witness`` (or any phase rotation of a Hermitian b).
    """
    m = density_matrix(rho)
    a = _abar_matrix(abar, m)
    b = linalg.require_square(b)
    if linalg.operator_norm(b) > 1.0 + 1e-10:
        raise ValueError("witness operator must have norm at most 1")
    return float(np.real(np.trace(m @ (a @ b - b @ a))))


def hypersurface_value(rho, surface: Hypersurface) -> float:
    return commutator_expectation(rho, surface.abar, surface.b)


# ---------------------------------------------------------------------------
# Qubit inner maximization
# ---------------------------------------------------------------------------

def _pauli_averages(n: int) -> list[np.ndarray]:
    return [averaging_matrix(SiteObservable(p / 2), n) for p in (SIGMA_X, SIGMA_Y, SIGMA_Z)]


def max_variance_qubit(rho):
    """Maximize Var(abar) over Bloch directions; returns (value, direction).

    The variance is the quadratic form ``v^T M v`` with
    ``M_pq = Re tr({S_p, S_q}/2 rho) - tr(S_p rho) tr(S_q rho)`` over the
    spin-component averages ``S_p``, so the maximum is its top eigenpair.
    """
    m = density_matrix(rho)
    n = round(math.log2(m.shape[0]))
    if 2**n != m.shape[0]:
        raise ValueError("max_variance_qubit requires local dimension 2")
    s = _pauli_averages(n)
    means = [float(np.real(np.trace(sp @ m))) for sp in s]
    mat = np.empty((3, 3))
    for p in range(3):
        for q in range(p, 3):
            sym = float(np.real(np.trace((s[p] @ s[q] + s[q] @ s[p]) / 2 @ m)))
            mat[p, q] = mat[q, p] = sym - means[p] * means[q]
    eig, vec = np.linalg.eigh(mat)
    value = float(eig[-1])
    return max(value, 0.0), vec[:, -1]


def fibonacci_sphere(count: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors on the sphere."""
    i = np.arange(count, dtype=float) + 0.5
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    z = 1.0 - 2.0 * i / count
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


# ---------------------------------------------------------------------------
# The outer search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MacroUncertaintyReport:
    """Certified lower bound on the uncertainty functional, plus the evidence."""

    e_lower: float
    maximizer: SiteObservable
    dual_b: np.ndarray
    variance_bound: float | None
    restarts_used: int
    iterations: int

    def to_dict(self) -> dict:
        return {
            "e_lower": self.e_lower,
            "maximizer": [[z.real, z.imag] for z in self.maximizer.matrix.reshape(-1)],
            "dual_b": [[z.real, z.imag] for z in self.dual_b.reshape(-1)],
            "variance_bound": self.variance_bound,
            "restarts_used": self.restarts_used,
            "iterations": self.iterations,
        }


def _tracenorm_and_sign(a: np.ndarray, m: np.ndarray):
    h = 1j * (a @ m - m @ a)
    eig, vec = np.linalg.eigh(h)
    value = float(np.sum(np.abs(eig)))
    return value, eig, vec


def _subgradient_sign(eig: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Minimal-norm subgradient factor: sign of the eigenvalues, 0 on the kernel.

    Eigenvalues within DEGENERACY_GAP of zero get weight 0, which is a valid
    subgradient element; if the resulting direction fails to improve, the
    backtracking loop stops and the best value found so far stands (the grid
    fallback).
    """
    signs = np.sign(eig)
    signs[np.abs(eig) < DEGENERACY_GAP] = 0.0
    return (vec * signs) @ vec.conj().T


def _ascend_bloch(v0, m, s_ops, max_iter, tol):
    """Projected subgradient ascent of the trace norm over the Bloch sphere."""
    v = v0 / np.linalg.norm(v0)
    best = float(np.sum(np.abs(np.linalg.eigvalsh(
        1j * ((v[0] * s_ops[0] + v[1] * s_ops[1] + v[2] * s_ops[2]) @ m
              - m @ (v[0] * s_ops[0] + v[1] * s_ops[1] + v[2] * s_ops[2]))))))
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        a = v[0] * s_ops[0] + v[1] * s_ops[1] + v[2] * s_ops[2]
        value, eig, vec = _tracenorm_and_sign(a, m)
        w = _subgradient_sign(eig, vec)
        grad = np.array([
            float(np.real(np.trace(w @ (1j * (sp @ m - m @ sp))))) for sp in s_ops
        ])
        grad -= np.dot(grad, v) * v
        if np.linalg.norm(grad) < tol:
            break
        step = 1.0
        improved = False
        while step > 1e-7:
            cand = v + step * grad
            cand /= np.linalg.norm(cand)
            a_c = cand[0] * s_ops[0] + cand[1] * s_ops[1] + cand[2] * s_ops[2]
            val_c = float(np.sum(np.abs(np.linalg.eigvalsh(1j * (a_c @ m - m @ a_c)))))
            if val_c > best + 1e-15:
                v, best = cand, val_c
                improved = True
                break
            step /= 2
        if not improved:
            break
    return v, best, iterations


def _estimate_qubit(m, n, grid_size, max_iter, tol):
    s_ops = _pauli_averages(n)
    candidates = list(fibonacci_sphere(grid_size))
    var_value, var_dir = max_variance_qubit(m)
    candidates.append(var_dir)
    candidates.append(-var_dir)

    def value_at(v):
        a = v[0] * s_ops[0] + v[1] * s_ops[1] + v[2] * s_ops[2]
        return float(np.sum(np.abs(np.linalg.eigvalsh(1j * (a @ m - m @ a)))))

    values = [value_at(v) for v in candidates]
    v0 = candidates[int(np.argmax(values))]
    v_best, best, iterations = _ascend_bloch(np.asarray(v0), m, s_ops, max_iter, tol)
    if best < max(values):
        v_best, best = np.asarray(v0), max(values)
    return SiteObservable.from_bloch(v_best), best, iterations, var_value


def _project_traceless(g: np.ndarray) -> np.ndarray:
    l = g.shape[0]
    return g - (np.trace(g) / l) * np.eye(l)


def _normalize_spread(c: np.ndarray) -> np.ndarray:
    eig = np.linalg.eigvalsh(c)
    spread = float(eig[-1] - eig[0])
    if spread <= 0:
        return c
    return c / spread


def _estimate_general(m, n, l, restarts, max_iter, tol, seed):
    rng = np.random.default_rng(seed)
    best_c = None
    best = -1.0
    iterations = 0
    for _ in range(max(restarts, 1)):
        g = rng.normal(size=(l, l)) + 1j * rng.normal(size=(l, l))
        c = _normalize_spread(_project_traceless((g + g.conj().T) / 2))
        a = averaging_matrix(SiteObservable(c), n)
        value = float(np.sum(np.abs(np.linalg.eigvalsh(1j * (a @ m - m @ a)))))
        for _ in range(max_iter):
            iterations += 1
            a = averaging_matrix(SiteObservable(c), n)
            _, eig, vec = _tracenorm_and_sign(a, m)
            w = _subgradient_sign(eig, vec)
            lifted = 1j * (m @ w - w @ m)
            grad = np.zeros((l, l), dtype=complex)
            for i in range(1, n + 1):
                grad += linalg.reduce_to_site(lifted, i, n, l)
            grad = _project_traceless((grad + grad.conj().T) / 2) / n
            if linalg.operator_norm(grad) < tol:
                break
            step = 1.0
            improved = False
            while step > 1e-7:
                cand = _normalize_spread(_project_traceless(c + step * grad))
                a_c = averaging_matrix(SiteObservable(cand), n)
                val_c = float(np.sum(np.abs(np.linalg.eigvalsh(1j * (a_c @ m - m @ a_c)))))
                if val_c > value + 1e-15:
                    c, value = cand, val_c
                    improved = True
                    break
                step /= 2
            if not improved:
                break
        if value > best:
            best, best_c = value, c
    return SiteObservable(best_c), best, iterations


def estimate_e(
    rho,
    *,
    restarts: int = 8,
    grid_size: int = 144,
    max_iter: int = 20,
    tol: float = 1e-9,
    seed: int = 0,
) -> MacroUncertaintyReport:
    """Search for the maximizing averaging observable; reports what it achieved.

    Deterministic given ``seed``.  For pure qubit states the report also
    carries the exact upper bound ``2 sqrt(max variance)`` (the functional
    equals that bound on pure states).
    """
    state = rho if isinstance(rho, DensityState) else rho.density()
    m = state.matrix
    n, l = state.n, state.l
    if l == 2:
        site, value, iterations, var_value = _estimate_qubit(m, n, grid_size, max_iter, tol)
        restarts_used = 1
    else:
        site, value, iterations = _estimate_general(m, n, l, restarts, max_iter, tol, seed)
        restarts_used = max(restarts, 1)
        var_value = None
    variance_bound = None
    if l == 2 and abs(state.purity() - 1.0) <= PURITY_ATOL:
        variance_bound = 2.0 * math.sqrt(max(var_value, 0.0))
        if value > variance_bound + 1e-8:
            raise RuntimeError(
                f"achieved value {value} exceeds the pure-state bound {variance_bound}"
            )
    _, witness = commutator_witness(site, m)
    return MacroUncertaintyReport(
        e_lower=value,
        maximizer=site,
        dual_b=witness,
        variance_bound=variance_bound,
        restarts_used=restarts_used,
        iterations=iterations,
    )


# ---------------------------------------------------------------------------
# Depth-bound verification for prepared states
# ---------------------------------------------------------------------------

def uncertainty_bound(n: int, k: int) -> float:
    """Ceiling sqrt(2/n) * 2^k on the functional after a depth-k network."""
    return math.sqrt(2.0 / n) * 2**k


@dataclass(frozen=True)
class UncertaintyBoundCheck:
    e_lower: float
    bound: float
    passed: bool
    report: MacroUncertaintyReport


def check_uncertainty_bound(
    net: Network,
    separable: SeparableInput,
    tol: float = 1e-8,
    **estimate_options,
) -> UncertaintyBoundCheck:
    """Run a separable input through the network and test the depth bound.

    The achieved value is a lower bound on the functional, so a failure here
    is a genuine counterexample, not an optimizer artifact.
    """
    rho_out = apply(net, mix(separable))
    report = estimate_e(rho_out, **estimate_options)
    bound = uncertainty_bound(net.n, net.depth)
    return UncertaintyBoundCheck(
        e_lower=report.e_lower,
        bound=bound,
        passed=report.e_lower <= bound + tol,
        report=report,
    )


def random_site_observable(l: int, rng: np.random.Generator) -> SiteObservable:
    """Random traceless Hermitian site observable, normalized to spread 1."""
    g = rng.normal(size=(l, l)) + 1j * rng.normal(size=(l, l))
    c = _normalize_spread(_project_traceless((g + g.conj().T) / 2))
    return SiteObservable(c)
