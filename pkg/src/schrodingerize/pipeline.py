"""The warped-phase pipeline: lift, transform, evolve, recover.

Given du/dt = -A u with A = H + i*Hbar, the state is lifted into an
auxiliary decay variable p,

    w(0, x, p) = exp(-|p|) u0(x),

which obeys dw/dt = H dw/dp - i*Hbar w: the profile convects left at the
dissipation rate, so no boundary condition is needed at p = 0 and the
original solution is recovered from the p >= 0 block.

Auxiliary transform convention
------------------------------
The forward transform expands w along the trailing axis in the basis
exp(-i*mu_j*p) with the unitary kernel, then reorders the modes ascending.
Under this convention every mode amplitude obeys a Schrodinger equation
with Hermitian generator mu_j*H + Hbar, so the flattened evolution is
exp(-i*(H (x) D + Hbar (x) 1)*t) with D the ascending mode diagonal.  (With
the opposite kernel the generator would be -mu_j*H + Hbar; only the mode
labelling differs.)

Three recovery routes are provided: trapezoid quadrature over p >= 0, point
evaluation exp(p*) w(., p*), and projection onto the p >= 0 block with its
measurement probability and amplification cost factor.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    AccuracyWarning,
    AxisSpec,
    DegenerateStateError,
    Grid1D,
    InvalidArgumentError,
    StateVector,
)
from .operators import EtaDiagonal, HermitianPair, assemble_eta_diagonal, hermitian_decompose

__all__ = [
    "WarpedState",
    "SpectralState",
    "RecoveryResult",
    "default_p_grid",
    "warp_extend",
    "dft_p",
    "idft_p",
    "evolve_blocks",
    "evolve_splitstep_heat",
    "recover_integrate",
    "recover_point",
    "project_positive",
    "schrodingerize_evolve",
]

DEFAULT_P_HALF_WIDTH = 12.0
DEFAULT_P_COUNT = 256


@dataclass(frozen=True)
class WarpedState:
    """State with a trailing auxiliary axis p, in physical p-space."""

    state: StateVector
    p_grid: Grid1D

    def __post_init__(self):
        last = self.state.layout[-1]
        if last.name != "p" or last.count != self.p_grid.count:
            raise InvalidArgumentError("warped state must end with the p axis")


@dataclass(frozen=True)
class SpectralState:
    """State with a trailing auxiliary-mode axis eta, ascending mode order."""

    state: StateVector
    eta_grid: Grid1D

    def __post_init__(self):
        last = self.state.layout[-1]
        if last.name != "eta" or last.count != self.eta_grid.count:
            raise InvalidArgumentError("spectral state must end with the eta axis")


@dataclass(frozen=True)
class RecoveryResult:
    """Recovered solution over the non-auxiliary axes.

    ``u`` carries the physical magnitude for the integration and point
    routes; the projection route returns the normalized direction with the
    magnitude estimate in ``u_norm``, the measurement ``success_probability``
    and the amplification ``cost_factor`` |w| / (sqrt(N/(2L)) |u|).
    """

    u: StateVector
    method: str
    success_probability: float | None = None
    p_star: float | None = None
    u_norm: float | None = None
    cost_factor: float | None = None
    cost: object | None = None


def default_p_grid(epsilon: float | None = None, t: float = 0.0, lambda_max: float = 0.0) -> Grid1D:
    """Auxiliary grid defaults.

    Without a precision target this is the package default (L=12, N=256).
    With a target eps the half-width covers truncation exp(-L) < eps plus
    the convection distance t*lambda_max, and the spacing honours
    dp <= min(0.05, eps); the kink of exp(-|p|) at p = 0 limits the
    spectral accuracy in p to second order, so precision is bought with N
    rather than with smoothing.
    """
    if epsilon is None:
        return Grid1D(DEFAULT_P_HALF_WIDTH, DEFAULT_P_COUNT)
    if not 0.0 < epsilon < 1.0:
        raise InvalidArgumentError(f"epsilon must be in (0, 1), got {epsilon}")
    half_width = max(DEFAULT_P_HALF_WIDTH, math.log(1.0 / epsilon) + t * lambda_max + 2.0)
    dp = min(0.05, epsilon)
    count = int(math.ceil(2.0 * half_width / dp))
    count += count % 2
    return Grid1D(half_width, max(count, 2))


def warp_extend(u0: StateVector, p_grid: Grid1D, truncation_tol: float = 1e-4) -> WarpedState:
    """Lift u0 into w(0, x, p) = exp(-|p|) u0(x) on the extended p grid.

    Warns when exp(-half_width) is not below ``truncation_tol``: the
    periodic wrap then feeds visible mass back into the domain.
    """
    if math.exp(-p_grid.half_width) >= truncation_tol:
        warnings.warn(
            f"exp(-{p_grid.half_width:g}) = {math.exp(-p_grid.half_width):.2e} "
            f"exceeds the requested truncation tolerance {truncation_tol:g}",
            AccuracyWarning,
            stacklevel=2,
        )
    profile = np.exp(-np.abs(p_grid.points))
    amplitudes = np.multiply.outer(u0.amplitudes, profile)
    layout = u0.layout + (AxisSpec("p", p_grid.count, p_grid),)
    return WarpedState(StateVector(amplitudes.reshape(-1), layout), p_grid)


def _phase(n: int) -> np.ndarray:
    # exp(+i*mu_k*p_0) for p_0 = -half_width: real alternating signs.
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def dft_p(w: WarpedState) -> SpectralState:
    """Unitary forward transform of the trailing p axis, modes ascending.

    Bin j holds the coefficient of exp(-i*mu_j*p); a pure tone
    exp(-i*mu*p) therefore lands on the single mode +mu.
    """
    arr = w.state.as_array()
    n = w.p_grid.count
    spec = np.fft.ifft(arr, axis=-1, norm="ortho") * _phase(n)
    spec = np.fft.fftshift(spec, axes=-1)
    layout = w.state.layout[:-1] + (AxisSpec("eta", n, w.p_grid),)
    return SpectralState(StateVector(spec.reshape(-1), layout), w.p_grid)


def idft_p(s: SpectralState) -> WarpedState:
    """Inverse of dft_p; the round trip is exact to unitary rounding."""
    arr = s.state.as_array()
    n = s.eta_grid.count
    spec = np.fft.ifftshift(arr, axes=-1) * _phase(n)
    phys = np.fft.fft(spec, axis=-1, norm="ortho")
    layout = s.state.layout[:-1] + (AxisSpec("p", n, s.eta_grid),)
    return WarpedState(StateVector(phys.reshape(-1), layout), s.eta_grid)


def _resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SCHRO_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def evolve_blocks(
    s0: SpectralState,
    pair: HermitianPair,
    d_matrix: EtaDiagonal,
    t: float,
    workers: int | None = None,
) -> SpectralState:
    """Evolve each mode slice by exp(-i*t*(mu_j*H + Hbar)), exact in time.

    Flattened, this equals exp(-i*(H (x) D + Hbar (x) 1)*t).  Every block
    is computed by its own dense eigendecomposition; with Hbar = 0 all
    blocks share the eigenbasis of H, which is decomposed once.  Blocks are
    independent, so they may be processed by ``workers`` threads; results
    are written into preallocated slots, making the output identical for
    any worker count.
    """
    if t < 0:
        raise InvalidArgumentError(f"evolution time must be nonnegative, got {t}")
    n = d_matrix.count
    if s0.eta_grid.count != n:
        raise InvalidArgumentError("eta axis and mode diagonal disagree in size")
    arr = s0.state.amplitudes.reshape(-1, n)
    if arr.shape[0] != pair.h.dimension:
        raise InvalidArgumentError(
            f"state block dimension {arr.shape[0]} != Hamiltonian dimension {pair.h.dimension}"
        )
    mus = d_matrix.diagonal
    h = pair.h.dense()
    if pair.h_bar.max_norm == 0.0:
        lam, vec = np.linalg.eigh(h)
        coeff = vec.conj().T @ arr
        coeff = coeff * np.exp(-1j * t * np.outer(lam, mus))
        out = vec @ coeff
        return SpectralState(s0.state.with_amplitudes(out.reshape(-1)), s0.eta_grid)

    hbar = pair.h_bar.dense()
    out = np.empty_like(arr)

    def run_block(j: int) -> None:
        lam, vec = np.linalg.eigh(mus[j] * h + hbar)
        out[:, j] = vec @ (np.exp(-1j * t * lam) * (vec.conj().T @ arr[:, j]))

    nworkers = _resolve_workers(workers)
    if nworkers == 1:
        for j in range(n):
            run_block(j)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            list(pool.map(run_block, range(n)))
    return SpectralState(s0.state.with_amplitudes(out.reshape(-1)), s0.eta_grid)


def evolve_splitstep_heat(
    s0: SpectralState,
    potential,
    grids,
    t: float,
    steps: int,
) -> SpectralState:
    """Strang split-step fast path for heat-form problems (Hbar = 0).

    Exploits that the Laplacian is diagonal in the spatial Fourier basis
    and the potential is diagonal in space: per substep
    exp(-i dt mu V/2) F^-1 exp(-i dt mu |xi|^2) F exp(-i dt mu V/2).
    Exact for V = 0; otherwise second order, error O((t/steps)^2).
    """
    if isinstance(grids, Grid1D):
        grids = [grids]
    grids = list(grids)
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps}")
    if t < 0:
        raise InvalidArgumentError(f"evolution time must be nonnegative, got {t}")
    n = s0.eta_grid.count
    shape = tuple(g.count for g in grids) + (n,)
    arr = s0.state.amplitudes.reshape(shape)
    x_axes = tuple(range(len(grids)))
    mus = np.fft.fftshift(2.0 * np.pi * np.fft.fftfreq(n, d=s0.eta_grid.spacing))

    ksq = np.zeros(shape[:-1])
    for axis, g in enumerate(grids):
        xi = 2.0 * np.pi * np.fft.fftfreq(g.count, d=g.spacing)
        sh = [1] * len(shape[:-1])
        sh[axis] = g.count
        ksq = ksq + (xi**2).reshape(sh)

    if potential is None:
        v = np.zeros(shape[:-1])
    elif callable(potential):
        axes = np.meshgrid(*[g.points for g in grids], indexing="ij")
        v = np.broadcast_to(np.asarray(potential(*axes)), shape[:-1])
    else:
        v = np.broadcast_to(np.asarray(potential), shape[:-1])
    if np.iscomplexobj(v) and np.abs(np.asarray(v).imag).max() > 0:
        raise InvalidArgumentError("split-step path requires a real potential (heat form)")
    v = np.asarray(v, dtype=float)

    if not np.any(v):
        phase = np.exp(-1j * t * ksq[..., None] * mus)
        out = np.fft.ifftn(np.fft.fftn(arr, axes=x_axes) * phase, axes=x_axes)
        return SpectralState(s0.state.with_amplitudes(out.reshape(-1)), s0.eta_grid)

    dt = t / steps
    half_v = np.exp(-0.5j * dt * v[..., None] * mus)
    kin = np.exp(-1j * dt * ksq[..., None] * mus)
    out = arr
    for _ in range(steps):
        out = out * half_v
        out = np.fft.ifftn(np.fft.fftn(out, axes=x_axes) * kin, axes=x_axes)
        out = out * half_v
    return SpectralState(s0.state.with_amplitudes(out.reshape(-1)), s0.eta_grid)


def _positive_indices(p_grid: Grid1D) -> np.ndarray:
    return np.arange(p_grid.count // 2, p_grid.count)


def recover_integrate(w: WarpedState, calibrate: bool = False) -> RecoveryResult:
    """u(x) = integral of w(x, p) over p >= 0 by the trapezoid rule.

    Nodes run from p = 0 to p = half_width, the endpoint taken from the
    periodic image p = -half_width, with half weights at both ends.  With
    ``calibrate`` the result is divided by the same quadrature applied to
    the initial profile exp(-|p|) (exactly 1 in the continuum), which
    removes the O(dp^2) quadrature bias shared by all modes and makes the
    t = 0 round trip exact.
    """
    grid = w.p_grid
    arr = w.state.as_array()
    n = grid.count
    pos = _positive_indices(grid)
    dp = grid.spacing
    acc = 0.5 * arr[..., pos[0]] + 0.5 * arr[..., 0]  # half weights at p=0 and p=L
    acc = acc + arr[..., pos[1:]].sum(axis=-1)
    u = dp * acc
    if calibrate:
        profile = np.exp(-np.abs(grid.points))
        cal = dp * (0.5 * profile[pos[0]] + 0.5 * profile[0] + profile[pos[1:]].sum())
        u = u / cal
    layout = w.state.layout[:-1]
    return RecoveryResult(u=StateVector(u.reshape(-1), layout), method="integration")


def recover_point(
    w: WarpedState,
    p_star: float,
    convection_estimate: float | None = None,
) -> RecoveryResult:
    """u(x) = exp(p*) w(x, p*) at a positive grid point p*.

    No interpolation: p* must lie on the grid.  The value at p* is only
    meaningful while the convected profile has not wrapped past it, i.e.
    while t*lambda_max < half_width - p*; pass ``convection_estimate`` =
    t*lambda_max to get a warning when the window is violated.
    """
    grid = w.p_grid
    if p_star <= 0:
        raise InvalidArgumentError(f"p_star must be positive, got {p_star}")
    idx = int(round((p_star + grid.half_width) / grid.spacing))
    if idx < 0 or idx >= grid.count or abs(grid.points[idx] - p_star) > 1e-9 * max(1.0, p_star):
        raise InvalidArgumentError(f"p_star = {p_star} is not a grid point")
    if convection_estimate is not None and convection_estimate >= grid.half_width - p_star:
        warnings.warn(
            f"point recovery outside its validity window: convection {convection_estimate:g} "
            f">= {grid.half_width - p_star:g}",
            AccuracyWarning,
            stacklevel=2,
        )
    u = math.exp(p_star) * w.state.as_array()[..., idx]
    layout = w.state.layout[:-1]
    return RecoveryResult(
        u=StateVector(u.reshape(-1), layout), method="point", p_star=float(p_star)
    )


def project_positive(w: WarpedState) -> RecoveryResult:
    """Project onto the p >= 0 block and collapse out the exp(-p) profile.

    The p = 0 slice enters with half quadrature weight.  Returns the
    normalized direction of u, the magnitude estimate from a least-squares
    fit of the profile, the projection probability
    |P w|^2 / |w|^2  ~ (|u| |exp(-p)| / |w|)^2, and the amplification cost
    factor |w| / (sqrt(N/(2L)) |u|), which equals |u(0)| / |u(t)| because
    the lifted norm is conserved.
    """
    grid = w.p_grid
    arr = w.state.as_array()
    pos = _positive_indices(grid)
    weights = np.ones(pos.size)
    weights[0] = 0.5  # p = 0 counted half
    block = arr[..., pos]
    block_mass = float(np.sum(weights * np.abs(block) ** 2))
    if block_mass == 0.0:
        raise DegenerateStateError("state has no support on p >= 0")
    profile = np.exp(-grid.points[pos])
    denom = float(np.sum(weights * profile**2))
    u_est = (block * (weights * profile)).sum(axis=-1) / denom
    u_norm = float(np.linalg.norm(u_est))
    if u_norm == 0.0:
        raise DegenerateStateError("positive block is orthogonal to the decay profile")
    w_norm = w.state.norm
    success = block_mass / w_norm**2
    normalizer = math.sqrt(grid.count / (2.0 * grid.half_width))
    cost_factor = w_norm / (normalizer * u_norm)
    layout = w.state.layout[:-1]
    return RecoveryResult(
        u=StateVector((u_est / u_norm).reshape(-1), layout),
        method="projection",
        success_probability=success,
        u_norm=u_norm,
        cost_factor=cost_factor,
    )


def schrodingerize_evolve(
    u0: StateVector,
    a_matrix: np.ndarray,
    p_grid: Grid1D | None,
    t: float,
    recovery: str = "integration",
    p_star: float | None = None,
    epsilon: float = 1e-3,
    workers: int | None = None,
) -> tuple[WarpedState, RecoveryResult]:
    """End-to-end run for du/dt = -A u: decompose, lift, evolve, recover.

    Returns the lifted state at time t together with the recovery result;
    the recovery carries a query/gate cost report for simulating the total
    Hamiltonian, using the measured norm ratio |u(0)|/|u(t)|.
    """
    from .costs import schrodingerisation_cost

    a = np.asarray(a_matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"matrix must be square, got shape {a.shape}")
    if a.shape[0] != u0.amplitudes.size:
        raise InvalidArgumentError(
            f"matrix dimension {a.shape[0]} != state length {u0.amplitudes.size}"
        )
    pair = hermitian_decompose(a)
    if p_grid is None:
        p_grid = default_p_grid()
    lam_max = 0.0
    if pair.h.max_norm > 0:
        lam_max = float(np.abs(np.linalg.eigvalsh(pair.h.dense())).max())
    if t * lam_max >= p_grid.half_width:
        warnings.warn(
            f"convection t*lambda_max = {t * lam_max:.2f} reaches the p boundary "
            f"{p_grid.half_width:g}; refine the auxiliary domain",
            AccuracyWarning,
            stacklevel=2,
        )
    d_matrix = assemble_eta_diagonal(p_grid)
    w0 = warp_extend(u0, p_grid, truncation_tol=max(1e-4, epsilon))
    s_t = evolve_blocks(dft_p(w0), pair, d_matrix, t, workers=workers)
    w_t = idft_p(s_t)
    if recovery == "integration":
        rec = recover_integrate(w_t, calibrate=True)
        u_t_norm = rec.u.norm
    elif recovery == "point":
        if p_star is None:
            p_star = p_grid.points[p_grid.count // 2 + max(1, p_grid.count // 8)]
        rec = recover_point(w_t, p_star, convection_estimate=t * lam_max)
        u_t_norm = rec.u.norm
    elif recovery == "projection":
        rec = project_positive(w_t)
        u_t_norm = rec.u_norm
    else:
        raise InvalidArgumentError(f"unknown recovery method {recovery!r}")
    norm_ratio = u0.norm / u_t_norm if u_t_norm > 0 else float("inf")
    cost = schrodingerisation_cost(
        norm_ratio=norm_ratio,
        s=max(pair.h.sparsity, pair.h_bar.sparsity, 1),
        t=max(t, np.finfo(float).tiny),
        max_norm=max(pair.h.max_norm, np.finfo(float).tiny),
        epsilon=epsilon,
        m_h=math.log2(pair.h.dimension * p_grid.count),
        max_norm_oscillatory=pair.h_bar.max_norm,
    )
    rec = RecoveryResult(
        u=rec.u,
        method=rec.method,
        success_probability=rec.success_probability,
        p_star=rec.p_star,
        u_norm=rec.u_norm,
        cost_factor=rec.cost_factor,
        cost=cost,
    )
    return w_t, rec
