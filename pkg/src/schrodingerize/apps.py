"""The four worked applications as configured pipelines.

* run_heat: periodic heat/diffusion with optional potential, checked
  against the exact Fourier solution (V = 0) or a dense matrix exponential,
* prepare_ground_state: dissipative relaxation onto the ground state of a
  Hermitian matrix, with the closed-form relaxation time,
* prepare_gibbs: thermal state exp(-beta*H)/Z via the purified evolution of
  a maximally entangled register pair for time beta/2,
* run_transport: kinetic transport with isotropic scattering, checked
  against a method-of-lines integrator, plus moment observables.

Each run reports its hypothetical quantum resource cost.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    AccuracyWarning,
    AxisSpec,
    Grid1D,
    InvalidArgumentError,
    StateVector,
    UnsupportedProblemError,
)
from .costs import (
    CostReport,
    gibbs_cost,
    ground_state_cost,
    relaxation_time,
    schrodingerisation_cost,
)
from .operators import (
    HermitianMatrix,
    HermitianPair,
    TransportModel,
    assemble_eta_diagonal,
    assemble_schrodinger_hamiltonian,
)
from .oracle import expm_apply, heat_analytic, transport_reference
from .pipeline import (
    default_p_grid,
    dft_p,
    evolve_blocks,
    idft_p,
    project_positive,
    recover_integrate,
    schrodingerize_evolve,
    warp_extend,
)

__all__ = [
    "HeatRunResult",
    "GroundStateReport",
    "GibbsReport",
    "MomentReport",
    "TransportRunResult",
    "run_heat",
    "estimate_t_final",
    "prepare_ground_state",
    "prepare_gibbs",
    "run_transport",
    "compute_moments",
    "observable_overlap",
    "find_stationary_transport",
]

GIBBS_P_HALF_WIDTH = 10.0
GIBBS_P_COUNT = 2048
TRANSPORT_P_HALF_WIDTH = 8.0


def _as_state(u0, grids: list[Grid1D], prefix: str = "x") -> StateVector:
    if isinstance(u0, StateVector):
        return u0
    layout = tuple(
        AxisSpec(f"{prefix}{i + 1}", g.count, g) for i, g in enumerate(grids)
    )
    return StateVector(np.asarray(u0, dtype=complex).reshape(-1), layout)


def _p_grid_from_config(p_config) -> Grid1D:
    if p_config is None:
        return default_p_grid()
    if isinstance(p_config, Grid1D):
        return p_config
    half_width, count = p_config
    return Grid1D(float(half_width), int(count))


@dataclass(frozen=True)
class HeatRunResult:
    u_recovered: StateVector
    u_reference: StateVector
    l2_relative_error: float
    norms: dict
    cost: CostReport


def run_heat(
    u0,
    potential,
    grids,
    p_config=None,
    t: float = 0.0,
    epsilon: float = 1e-3,
    workers: int | None = None,
) -> HeatRunResult:
    """Heat pipeline: lift, transform, evolve every auxiliary mode, recover.

    The reference is the exact Fourier solution when V = 0 and a dense
    matrix exponential of the assembled Hamiltonian otherwise.  The norms
    dictionary records the conserved lifted norm at both ends together with
    the projection bookkeeping (success probability and amplification cost
    factor).
    """
    if isinstance(grids, Grid1D):
        grids = [grids]
    grids = list(grids)
    u0_state = _as_state(u0, grids)
    h = assemble_schrodinger_hamiltonian(potential, grids)
    pair = HermitianPair(
        h=h,
        h_bar=HermitianMatrix.from_entries(np.zeros((h.dimension, h.dimension))),
        source_dimension=h.dimension,
    )
    p_grid = _p_grid_from_config(p_config)
    d_matrix = assemble_eta_diagonal(p_grid)
    w0 = warp_extend(u0_state, p_grid)
    s0 = dft_p(w0)
    s_t = evolve_blocks(s0, pair, d_matrix, t, workers=workers)
    w_t = idft_p(s_t)
    rec = recover_integrate(w_t, calibrate=True)
    projection = project_positive(w_t)

    v_is_zero = potential is None or (
        not callable(potential) and not np.any(np.asarray(potential))
    )
    if v_is_zero:
        u_ref = heat_analytic(u0_state, grids, t)
    else:
        u_ref = u0_state.with_amplitudes(expm_apply(h.dense(), u0_state.amplitudes, t))

    err = float(
        np.linalg.norm(rec.u.amplitudes - u_ref.amplitudes) / np.linalg.norm(u_ref.amplitudes)
    )
    norms = {
        "u_initial": u0_state.norm,
        "u_recovered": rec.u.norm,
        "u_reference": u_ref.norm,
        "w_spectral_initial": s0.state.norm,
        "w_spectral_final": s_t.state.norm,
        "success_probability": projection.success_probability,
        "cost_factor": projection.cost_factor,
    }
    cost = schrodingerisation_cost(
        norm_ratio=projection.cost_factor,  # the measured |u(0)|/|u(t)|
        s=max(h.sparsity, 1),
        t=max(t, np.finfo(float).tiny),
        max_norm=h.max_norm,
        epsilon=epsilon,
        m_h=math.log2(h.dimension * p_grid.count),
    )
    return HeatRunResult(
        u_recovered=rec.u,
        u_reference=u_ref,
        l2_relative_error=err,
        norms=norms,
        cost=cost,
    )


def estimate_t_final(gap: float, alpha0_sq: float, epsilon: float) -> float:
    """Evolution time (1/gap)*ln(1/(epsilon*alpha0_sq)) for target infidelity."""
    return relaxation_time(gap, alpha0_sq, epsilon)


@dataclass(frozen=True)
class GroundStateReport:
    t_final: float
    fidelity: float
    gap: float
    alpha0_sq: float
    epsilon: float
    cost: CostReport
    u_recovered: StateVector | None = None


def prepare_ground_state(
    h,
    u0,
    epsilon: float,
    p_grid: Grid1D | None = None,
    workers: int | None = None,
) -> GroundStateReport:
    """Relax u0 under exp(-H t) until the ground-state fidelity is 1 - eps.

    The spectrum is shifted by its smallest eigenvalue before the run; the
    removed scalar only rescales the state, so the recovered direction and
    the fidelity are unchanged while the lifted profile keeps convecting
    leftward.
    """
    h_mat = h if isinstance(h, HermitianMatrix) else HermitianMatrix.from_entries(h)
    dense = h_mat.dense()
    energies, vectors = np.linalg.eigh(dense)
    gap = float(energies[1] - energies[0])
    scale = max(1.0, float(np.abs(energies).max()))
    if gap <= 1e-12 * scale:
        raise UnsupportedProblemError("degenerate ground level: no spectral gap")
    u0 = np.asarray(u0, dtype=complex).reshape(-1)
    if u0.size != h_mat.dimension:
        raise InvalidArgumentError(
            f"state length {u0.size} != Hamiltonian dimension {h_mat.dimension}"
        )
    u0 = u0 / np.linalg.norm(u0)
    ground = vectors[:, 0]
    alpha0_sq = float(np.abs(ground.conj() @ u0) ** 2)
    if alpha0_sq < 1e-14:
        raise InvalidArgumentError("initial state has no overlap with the ground state")
    t_final = estimate_t_final(gap, alpha0_sq, epsilon)

    shifted = dense - energies[0] * np.eye(h_mat.dimension)
    lam_max = float(energies[-1] - energies[0])
    if p_grid is None:
        p_grid = default_p_grid(epsilon=epsilon, t=t_final, lambda_max=lam_max)
    state = StateVector(u0, (AxisSpec("x1", u0.size),))
    _, rec = schrodingerize_evolve(
        state, shifted, p_grid, t_final, epsilon=epsilon, workers=workers
    )
    u_rec = rec.u.amplitudes / np.linalg.norm(rec.u.amplitudes)
    fidelity = float(np.abs(ground.conj() @ u_rec) ** 2)
    cost = ground_state_cost(
        s=max(h_mat.sparsity, 1),
        max_norm=h_mat.max_norm,
        alpha0=math.sqrt(alpha0_sq),
        gap=gap,
        epsilon=epsilon,
        m_h=math.log2(h_mat.dimension * p_grid.count),
    )
    return GroundStateReport(
        t_final=t_final,
        fidelity=fidelity,
        gap=gap,
        alpha0_sq=alpha0_sq,
        epsilon=epsilon,
        cost=cost,
        u_recovered=rec.u.with_amplitudes(u_rec),
    )


@dataclass(frozen=True)
class GibbsReport:
    beta: float
    rho: np.ndarray
    trace_distance_to_exact: float
    partition_function: float
    cost: CostReport


def _trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def prepare_gibbs(
    h,
    beta: float,
    p_grid: Grid1D | None = None,
    workers: int | None = None,
) -> GibbsReport:
    """Prepare exp(-beta*H)/Z by evolving a maximally entangled pair.

    The start state is (1/sqrt(D)) sum_j |j>|j>, evolved under H (x) 1 for
    time beta/2; tracing out the register H does not act on yields the
    thermal state for any Hermitian H (for complex eigenvectors the other
    register would give the complex conjugate instead).  The spectrum is
    shifted to start at zero; the scalar cancels in the normalized density
    matrix.
    """
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    h_mat = h if isinstance(h, HermitianMatrix) else HermitianMatrix.from_entries(h)
    dim = h_mat.dimension
    dense = h_mat.dense()
    energies = np.linalg.eigvalsh(dense)
    shifted = dense - energies[0] * np.eye(dim)
    partition_z = float(np.exp(-beta * energies).sum())

    big = np.kron(shifted, np.eye(dim))
    entangled = np.eye(dim, dtype=complex).reshape(-1) / math.sqrt(dim)
    state = StateVector(entangled, (AxisSpec("x1", dim * dim),))
    if p_grid is None:
        p_grid = Grid1D(GIBBS_P_HALF_WIDTH, GIBBS_P_COUNT)
    # projection recovery: only the direction of the purification matters
    # for rho, and the profile fit damps the periodic wrap of the lifted
    # state exponentially harder than the quadrature route does
    _, rec = schrodingerize_evolve(
        state, big, p_grid, beta / 2.0, recovery="projection", workers=workers
    )
    psi = rec.u.amplitudes.reshape(dim, dim)
    rho = psi @ psi.conj().T
    rho = rho / np.trace(rho).real

    exact = _exact_gibbs(dense, beta)
    cost = gibbs_cost(
        s=max(h_mat.sparsity, 1),
        max_norm=h_mat.max_norm,
        beta=beta,
        dim=dim,
        partition_z=partition_z,
        epsilon=1e-3,
    )
    return GibbsReport(
        beta=beta,
        rho=rho,
        trace_distance_to_exact=_trace_distance(rho, exact),
        partition_function=partition_z,
        cost=cost,
    )


def _exact_gibbs(dense: np.ndarray, beta: float) -> np.ndarray:
    energies, vectors = np.linalg.eigh(dense)
    weights = np.exp(-beta * (energies - energies[0]))
    rho = (vectors * weights) @ vectors.conj().T
    return rho / weights.sum()


@dataclass(frozen=True)
class MomentReport:
    mass: float
    momentum: np.ndarray
    energy: float


def compute_moments(w, grids=None) -> MomentReport:
    """Quadrature moments of a phase-space density W(x, k).

    mass = sum W dx dk, momentum_l = sum k_l W dx dk, energy = sum |k|^2/2
    W dx dk.  Requires a real-valued W (imaginary residue above 1e-8 is an
    error).
    """
    if isinstance(w, StateVector):
        arr = w.as_array()
        axes = w.layout
        x_axes = [ax for ax in axes if ax.name.startswith("x")]
        k_axes = [ax for ax in axes if ax.name.startswith("k")]
        if len(x_axes) + len(k_axes) != len(axes) or not k_axes:
            raise InvalidArgumentError("moments need a state over (x.., k..) axes")
        x_grids = [ax.grid for ax in x_axes]
        k_grids = [ax.grid for ax in k_axes]
    else:
        x_grids, k_grids = grids
        x_grids = [x_grids] if isinstance(x_grids, Grid1D) else list(x_grids)
        k_grids = [k_grids] if isinstance(k_grids, Grid1D) else list(k_grids)
        shape = tuple(g.count for g in x_grids) + tuple(g.count for g in k_grids)
        arr = np.asarray(w).reshape(shape)
    if np.iscomplexobj(arr):
        if float(np.abs(arr.imag).max()) > 1e-8:
            raise InvalidArgumentError("moments require a real-valued density")
        arr = arr.real
    if any(g is None for g in x_grids + k_grids):
        raise InvalidArgumentError("moment axes must carry grids")
    d = len(k_grids)
    weight = float(np.prod([g.spacing for g in x_grids + k_grids]))
    mass = float(arr.sum()) * weight
    momentum = np.empty(d)
    ksq = np.zeros_like(arr)
    for l, g in enumerate(k_grids):
        sh = [1] * arr.ndim
        sh[len(x_grids) + l] = g.count
        kl = g.points.reshape(sh)
        momentum[l] = float((arr * kl).sum()) * weight
        ksq = ksq + np.broadcast_to(kl**2, arr.shape)
    energy = 0.5 * float((arr * ksq).sum()) * weight
    return MomentReport(mass=mass, momentum=momentum, energy=energy)


def observable_overlap(g, w) -> float:
    """|<g, w>|^2 for unit-normalized inputs: the fidelity a swap test
    would estimate between the observable state and the density state."""
    if isinstance(g, StateVector) and isinstance(w, StateVector):
        if g.shape != w.shape or g.axis_names != w.axis_names:
            raise InvalidArgumentError("states must share the same layout")
        gv, wv = g.amplitudes, w.amplitudes
    else:
        gv = np.asarray(g, dtype=complex).reshape(-1)
        wv = np.asarray(w, dtype=complex).reshape(-1)
        if gv.size != wv.size:
            raise InvalidArgumentError("vectors must have equal length")
    gn, wn = np.linalg.norm(gv), np.linalg.norm(wv)
    if gn == 0 or wn == 0:
        raise InvalidArgumentError("overlap of a zero vector is undefined")
    return float(np.abs(np.vdot(gv / gn, wv / wn)) ** 2)


@dataclass(frozen=True)
class TransportRunResult:
    w_recovered: StateVector
    w_reference: StateVector
    l2_relative_error: float
    moments: MomentReport
    norms: dict
    cost: CostReport


def _transport_layout(model: TransportModel) -> tuple[AxisSpec, ...]:
    axes = tuple(
        AxisSpec(f"x{i + 1}", g.count, g) for i, g in enumerate(model.x_grids)
    ) + tuple(AxisSpec(f"k{i + 1}", g.count, g) for i, g in enumerate(model.k_grids))
    return axes


def run_transport(
    model: TransportModel,
    w0,
    p_config=None,
    t: float = 0.0,
    epsilon: float = 1e-3,
    workers: int | None = None,
) -> TransportRunResult:
    """Transport pipeline over (x, k): spatial Fourier transform, lift in p,
    per-mode unitary evolution, inverse transforms, recovery.

    The per-mode generator is mu*(Sigma - sigma) + diag(xi . k): the
    scattering enters through the (positive semi-definite) loss-gain
    matrix and the advection through the diagonal symbol.  The reference
    is the RK4 method-of-lines solution on the same (x, k) grid.
    """
    layout = _transport_layout(model)
    if isinstance(w0, StateVector):
        w0_state = w0
    else:
        w0_state = StateVector(np.asarray(w0, dtype=complex).reshape(-1), layout)
    arr0 = w0_state.as_array()
    if np.iscomplexobj(arr0) and (
        float(np.abs(arr0.imag).max()) > 1e-12 or float(arr0.real.min()) < -1e-12
    ):
        warnings.warn(
            "transport initial data should be real and nonnegative",
            AccuracyWarning,
            stacklevel=2,
        )
    d = model.dimension
    x_axes = tuple(range(d))

    spec0 = np.fft.fftn(arr0, axes=x_axes, norm="ortho")
    layout_xi = tuple(
        AxisSpec(f"xi{i + 1}", g.count, g) for i, g in enumerate(model.x_grids)
    ) + layout[d:]
    spec_state = StateVector(spec0.reshape(-1), layout_xi)

    collision = model.collision_matrix()  # Sigma - sigma, PSD for nonneg sigma
    h = HermitianMatrix.from_entries(
        np.kron(np.eye(model.x_count), collision).astype(complex)
    )
    h_bar = HermitianMatrix.from_entries(np.diag(model.advection_diagonal()).astype(complex))
    pair = HermitianPair(h=h, h_bar=h_bar, source_dimension=h.dimension)

    if p_config is None:
        lam_max = float(np.abs(np.linalg.eigvalsh(collision)).max())
        half_width = max(TRANSPORT_P_HALF_WIDTH, t * lam_max + 4.0)
        p_grid = Grid1D(half_width, 64)
    else:
        p_grid = _p_grid_from_config(p_config)
    d_matrix = assemble_eta_diagonal(p_grid)

    lifted = warp_extend(spec_state, p_grid, truncation_tol=1e-2)
    s0 = dft_p(lifted)
    s_t = evolve_blocks(s0, pair, d_matrix, t, workers=workers)
    w_t = idft_p(s_t)
    rec = recover_integrate(w_t, calibrate=True)
    projection = project_positive(w_t)

    spec_rec = rec.u.amplitudes.reshape(spec0.shape)
    w_rec = np.fft.ifftn(spec_rec, axes=x_axes, norm="ortho")
    w_rec_state = StateVector(w_rec.reshape(-1), layout)

    w_ref = transport_reference(model, arr0, t)
    w_ref_state = StateVector(np.asarray(w_ref).reshape(-1), layout)
    err = float(
        np.linalg.norm(w_rec_state.amplitudes - w_ref_state.amplitudes)
        / np.linalg.norm(w_ref_state.amplitudes)
    )
    moments = compute_moments(w_rec_state.with_amplitudes(w_rec_state.amplitudes.real))
    norms = {
        "w_initial": w0_state.norm,
        "w_recovered": w_rec_state.norm,
        "w_spectral_initial": s0.state.norm,
        "w_spectral_final": s_t.state.norm,
        "success_probability": projection.success_probability,
        "cost_factor": projection.cost_factor,
    }
    norm_ratio = w0_state.norm / w_rec_state.norm if w_rec_state.norm > 0 else float("inf")
    cost = schrodingerisation_cost(
        norm_ratio=norm_ratio,
        s=max(h.sparsity, h_bar.sparsity, 1),
        t=max(t, np.finfo(float).tiny),
        max_norm=max(h.max_norm, np.finfo(float).tiny),
        epsilon=epsilon,
        m_h=math.log2(h.dimension * p_grid.count),
        max_norm_oscillatory=h_bar.max_norm,
    )
    return TransportRunResult(
        w_recovered=w_rec_state,
        w_reference=w_ref_state,
        l2_relative_error=err,
        moments=moments,
        norms=norms,
        cost=cost,
    )


def find_stationary_transport(
    model: TransportModel,
    w0,
    leg: float = 0.5,
    tol: float = 1e-8,
    max_legs: int = 200,
    workers: int | None = None,
):
    """Long-time transport evolution until ||W(t+leg) - W(t)|| < tol.

    Runs the pipeline leg by leg (re-lifting the recovered state each time)
    rather than solving a nullspace problem, so the stationary state is
    produced by the same machinery as the transient runs.  Returns
    (W_stationary, legs_used, converged).
    """
    layout = _transport_layout(model)
    if isinstance(w0, StateVector):
        current = w0
    else:
        current = StateVector(np.asarray(w0, dtype=complex).reshape(-1), layout)
    for n in range(1, max_legs + 1):
        result = run_transport(model, current, t=leg, workers=workers)
        nxt = result.w_recovered
        delta = float(np.linalg.norm(nxt.amplitudes - current.amplitudes))
        current = nxt
        if delta < tol:
            return current, n, True
    return current, max_legs, False
