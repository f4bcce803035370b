"""Explicit simulation of the von Neumann measurement scheme.

A pointer with coordinate q couples to a system observable A through
H_int = G h(t) pi (x) A, where pi is the pointer momentum and h(t) a
normalized profile.  This module evolves the composite system-pointer
state, extracts pointer distributions (unconditioned and postselected),
survival probabilities, and the pointer readouts of time-moment meters,
and cross-checks the derivative identities relating pointer statistics
to weak values.

Because the pointer has no free Hamiltonian, the evolution factorizes
over pointer momentum modes: each Fourier mode of the pointer profile
drags an independent system evolution with the scalar coupling
G h(t) pi_k A.  The default engine exploits this; a literal composite
evolution is kept for small-grid cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .clocks import extrapolate_to_zero
from .dynamics import (
    CouplingProfile,
    Hamiltonian,
    InteractionTerm,
    Propagator,
    evolve,
)
from .errors import (
    DegeneratePostselectionError,
    ParameterError,
    StructureError,
)
from .hilbert import (
    HBAR,
    Grid,
    OperatorMatrix,
    QuantumState,
    fourier_momentum_operator,
    fourier_momentum_values,
    gaussian_pointer,
    inner_product,
    pointer_space,
)
from .sojourn import SojournOperator, schroedinger_picture_schedule

# relative pointer-mode cutoff: the Fourier coefficients of a truncated
# Gaussian profile plateau near 1e-9 of the peak, and modes at that level
# move the composite state by less than the cutoff; keeping them costs one
# dense evolution each.  Pass mode_cutoff=0.0 to keep every mode.
DEFAULT_MODE_CUTOFF = 1e-8
EDGE_MASS_BUDGET = 1e-7
_TIME_ATOL = 1e-9


@dataclass(frozen=True)
class PointerSpec:
    """Pointer register: a q-grid and the initial Gaussian width.

    The initial profile is a normalized Gaussian centered at q = 0; the
    grid must contain the origin so that the center is representable.
    """

    grid: Grid
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ParameterError("pointer width must be positive")
        if np.min(np.abs(self.grid.points)) > 0.5 * self.grid.dx:
            raise ParameterError("pointer grid must contain q = 0")

    @classmethod
    def auto(
        cls,
        width: float,
        max_shift: float = 0.0,
        n_points: int = 256,
        extent_factor: float = 12.0,
    ) -> "PointerSpec":
        """Grid sized to hold both the initial profile and the largest
        expected shift, with q = 0 on a grid point."""
        scale = max(width, abs(max_shift))
        extent = extent_factor * scale
        dq = extent / (n_points - 1)
        x_min = -(n_points // 2) * dq
        grid = Grid(n_points, x_min, x_min + (n_points - 1) * dq)
        return cls(grid, width)

    def space(self):
        return pointer_space(self.grid)

    def initial_state(self) -> QuantumState:
        state = gaussian_pointer(self.grid, self.width)
        q = self.grid.points
        mean = float(np.sum(q * np.abs(state.amplitudes) ** 2) * self.grid.dx)
        if abs(mean) > self.grid.dx:
            raise ParameterError("initial pointer mean off center by more than dq")
        return state


@dataclass(frozen=True, eq=False)
class MeterRun:
    """One measurement experiment: composite final state plus context.

    `reference_system_final` is the system state evolved with the meter
    switched off, used for survival probabilities and as the G = 0
    reference in derivative identities.
    """

    spec: PointerSpec
    coupling: float
    profile: CouplingProfile
    window: tuple[float, float]
    observable_label: str
    engine: str
    final: QuantumState
    reference_system_final: QuantumState
    pointer_initial: QuantumState
    norm_drift: float

    @property
    def system_dimension(self) -> int:
        return self.final.amplitudes.size // self.spec.grid.n_points

    def final_array(self) -> np.ndarray:
        """Final amplitudes reshaped to (system dimension, pointer points)."""
        return self.final.amplitudes.reshape(
            self.system_dimension, self.spec.grid.n_points
        )

    @property
    def system_weight(self) -> float:
        return self.final.cell_weight / self.spec.grid.dx


@dataclass(frozen=True)
class PointerDistribution:
    """Probability density over the pointer coordinate."""

    grid: Grid
    density: np.ndarray
    mean: float
    variance: float
    postselection: Optional[str] = None
    probability: float = 1.0

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        total = float(np.sum(d) * self.grid.dx)
        if abs(total - 1.0) > 1e-9:
            raise ParameterError(f"density normalization off by {total - 1.0:.3e}")
        if self.variance < -1e-12:
            raise ParameterError("negative pointer variance")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "density", d)

    def peak_count(self, threshold: float = 0.01) -> int:
        """Number of interior local maxima above `threshold` of the peak."""
        d = self.density
        floor = threshold * np.max(d)
        inner = (d[1:-1] > d[:-2]) & (d[1:-1] >= d[2:]) & (d[1:-1] > floor)
        return int(np.count_nonzero(inner))


def _check_initial_time(psi0: QuantumState, t0: float) -> None:
    if abs(psi0.representation_time - t0) > _TIME_ATOL:
        raise ParameterError(
            f"initial state at t={psi0.representation_time} but run starts at {t0}"
        )


def _significant_modes(coeffs: np.ndarray, cutoff: float) -> np.ndarray:
    return np.abs(coeffs) > cutoff * np.max(np.abs(coeffs))


def _compose(run_modes: np.ndarray) -> np.ndarray:
    """Assemble the composite array from per-mode system vectors,
    run_modes[s, k] = c_k psi_k[s], via the inverse pointer transform."""
    return np.fft.ifft(run_modes, axis=1)


def _edge_check(spec: PointerSpec, composite: np.ndarray, system_weight: float) -> None:
    f = system_weight * np.sum(np.abs(composite) ** 2, axis=0)
    mass = float((np.sum(f[:2]) + np.sum(f[-2:])) * spec.grid.dx)
    if mass > EDGE_MASS_BUDGET:
        raise ParameterError(
            f"pointer support reaches the grid edge (mass {mass:.3e}); "
            "enlarge the pointer grid"
        )


def _finish_run(
    spec, coupling, profile, window, label, engine, composite, psi_ref, phi, psi0
):
    system_space = psi_ref.space
    full_space = (*system_space, spec.space())
    final = QuantumState(full_space, composite.ravel(), window[1])
    _edge_check(spec, composite, final.cell_weight / spec.grid.dx)
    drift = abs(final.norm() - psi0.norm() * phi.norm())
    return MeterRun(
        spec=spec,
        coupling=coupling,
        profile=profile,
        window=tuple(window),
        observable_label=label,
        engine=engine,
        final=final,
        reference_system_final=psi_ref,
        pointer_initial=phi,
        norm_drift=drift,
    )


def run_meter(
    spec: PointerSpec,
    psi0: QuantumState,
    observable: OperatorMatrix,
    coupling: float,
    profile: CouplingProfile,
    system: Hamiltonian,
    window: Optional[tuple[float, float]] = None,
    engine: str = "factorized",
    dt: float = 0.05,
    mode_cutoff: float = DEFAULT_MODE_CUTOFF,
) -> MeterRun:
    """Evolve psi0 (x) Gaussian pointer under H + G h(t) pi (x) A.

    The observable A is a fixed hermitian matrix on the system space.
    engine="factorized" solves each pointer momentum mode with one exact
    matrix exponential over the (piecewise constant) profile window;
    engine="composite" evolves the literal tensor-product state and is
    meant for small grids.
    """
    if tuple(observable.space) != tuple(system.space):
        raise StructureError("observable must live on the system space")
    if not observable.hermitian:
        raise ParameterError("measured observable must be hermitian")
    window = tuple(window) if window else (profile.t_start, profile.t_stop)
    t0, t1 = window
    if not (t0 <= profile.t_start and profile.t_stop <= t1 + _TIME_ATOL):
        raise ParameterError("coupling profile extends outside the run window")
    _check_initial_time(psi0, t0)
    phi = spec.initial_state()

    if engine == "composite":
        return _run_composite(
            spec, psi0, observable, coupling, profile, system, window, dt, phi
        )
    if engine != "factorized":
        raise ParameterError(f"unknown meter engine {engine!r}")
    if not system.is_hermitian():
        raise ParameterError("factorized engine requires a hermitian system")

    vals, vecs = system.eigensystem()
    psi_eig = vecs.conj().T @ psi0.amplitudes
    pre = np.exp(-1j * vals * (profile.t_start - t0) / HBAR)
    post = np.exp(-1j * vals * (t1 - profile.t_stop) / HBAR)
    during = np.exp(-1j * vals * profile.duration / HBAR)
    psi_ref = QuantumState(psi0.space, vecs @ (post * during * pre * psi_eig), t1)

    coeffs = np.fft.fft(phi.amplitudes)
    pi_vals = fourier_momentum_values(spec.grid)
    sig = _significant_modes(coeffs, mode_cutoff)
    hmat = system.matrix_at(profile.t_start) - _interaction_free_part(system, profile)
    v_start = vecs @ (pre * psi_eig)

    modes = np.empty((psi0.amplitudes.size, spec.grid.n_points), dtype=complex)
    modes[:, ~sig] = np.outer(psi_ref.amplitudes, coeffs[~sig])
    rate = coupling / profile.duration
    for k in np.nonzero(sig)[0]:
        hk = hmat + (rate * pi_vals[k]) * observable.matrix
        wk, uk = scipy.linalg.eigh(hk)
        v = uk @ (
            np.exp(-1j * profile.duration / HBAR * wk) * (uk.conj().T @ v_start)
        )
        if t1 > profile.t_stop + _TIME_ATOL:
            v = vecs @ (post * (vecs.conj().T @ v))
        modes[:, k] = coeffs[k] * v

    composite = _compose(modes)
    return _finish_run(
        spec, coupling, profile, window, _label(observable), "factorized",
        composite, psi_ref, phi, psi0,
    )


def _label(observable) -> str:
    return "observable" if isinstance(observable, OperatorMatrix) else "schedule"


def _interaction_free_part(system: Hamiltonian, profile: CouplingProfile) -> np.ndarray:
    """matrix_at inside the profile must be the bare system part; reject
    Hamiltonians that already carry their own couplings."""
    if system.interaction is not None or system.spin_coupling is not None:
        raise ParameterError("pass a bare system Hamiltonian; the meter adds its own coupling")
    return np.zeros((system.dimension, system.dimension))


def _run_composite(
    spec, psi0, observable, coupling, profile, system, window, dt, phi
):
    _interaction_free_part(system, profile)
    t0, t1 = window
    full = Hamiltonian(
        (*system.space, spec.space()),
        kinetic=system.kinetic,
        potential_real=system.potential_real,
        potential_imag=system.potential_imag,
        interaction=InteractionTerm(
            coupling=coupling,
            profile=profile,
            system_operator=observable,
            pointer_momentum=fourier_momentum_operator(spec.grid),
        ),
    )
    state0 = QuantumState(
        full.space, np.kron(psi0.amplitudes, phi.amplitudes), t0
    )
    prop = Propagator("dense_exponential", dt, full)
    final = evolve(state0, prop, t0, t1)
    psi_ref = evolve(psi0, Propagator("dense_exponential", dt, system), t0, t1)
    composite = final.amplitudes.reshape(psi0.amplitudes.size, spec.grid.n_points)
    return _finish_run(
        spec, coupling, profile, window, _label(observable), "composite",
        composite, psi_ref, phi, psi0,
    )


# -- moment meters ---------------------------------------------------------


def _scheduled_eig_evolution(vals, base_eig, window, dt, strength, v_eig):
    """Evolve an eigenbasis vector under H + (strength/T) O(t) over the
    window, where O(t) is the backward-propagated picture of the operator
    whose eigenbasis matrix is `base_eig`, frozen at step midpoints.

    The conjugating phases are diagonal, so only one matrix exponential is
    needed regardless of the step count.
    """
    t0, tf = window
    span = tf - t0
    n = int(round(span / dt))
    if n < 1 or abs(n * dt - span) > _TIME_ATOL * max(1.0, span):
        raise ParameterError(f"dt = {dt} does not divide the window {span}")
    wk, uk = scipy.linalg.eigh(np.diag(vals) + (strength / span) * base_eig)
    step = uk @ (np.exp(-1j * dt / HBAR * wk)[:, None] * uk.conj().T)
    drift = np.exp(1j * vals * dt / HBAR)
    tm0 = t0 + 0.5 * dt
    v = np.exp(-1j * vals * (tf - tm0) / HBAR) * v_eig
    v = step @ v
    for _ in range(n - 1):
        v = step @ (drift * v)
    tml = t0 + (n - 0.5) * dt
    return np.exp(1j * vals * (tf - tml) / HBAR) * v


def run_moment_meter(
    spec: PointerSpec,
    psi0: QuantumState,
    op: SojournOperator,
    order: int,
    coupling: float,
    system: Hamiltonian,
    engine: str = "stepped",
    dt: float = 0.05,
    mode_cutoff: float = DEFAULT_MODE_CUTOFF,
) -> MeterRun:
    """Couple the pointer to the l-th power of the time-in-region operator,
    carried along in the evolving picture so that the interaction commutes
    with its own history.

    engine="stepped" integrates the time-dependent coupling with midpoint
    freezing; engine="exact" uses the closed-form interaction-picture
    solution exp(-i G pi_k T^l); engine="composite" evolves the literal
    tensor product (small grids).  The run window is the operator's window.
    """
    if order < 1 or order > 4:
        raise ParameterError("moment meter supports orders 1..4")
    window = op.window
    t0, t1 = window
    profile = CouplingProfile.rectangular(t0, t1)
    _check_initial_time(psi0, t0)
    _interaction_free_part(system, profile)
    if not system.is_hermitian():
        raise ParameterError("moment meter requires a hermitian system")

    if engine == "composite":
        schedule = schroedinger_picture_schedule(op, system, power=order)
        phi = spec.initial_state()
        full = Hamiltonian(
            (*system.space, spec.space()),
            kinetic=system.kinetic,
            potential_real=system.potential_real,
            interaction=InteractionTerm(
                coupling=coupling,
                profile=profile,
                system_operator=schedule,
                pointer_momentum=fourier_momentum_operator(spec.grid),
            ),
        )
        state0 = QuantumState(full.space, np.kron(psi0.amplitudes, phi.amplitudes), t0)
        final = evolve(state0, Propagator("dense_exponential", dt, full), t0, t1)
        psi_ref = evolve(psi0, Propagator("dense_exponential", dt, system), t0, t1)
        composite = final.amplitudes.reshape(psi0.amplitudes.size, spec.grid.n_points)
        return _finish_run(
            spec, coupling, profile, window, f"region time^{order}", "composite",
            composite, psi_ref, phi, psi0,
        )

    vals, vecs = system.eigensystem()
    base_eig = np.linalg.matrix_power(
        vecs.conj().T @ op.matrix.matrix @ vecs, order
    )
    base_eig = 0.5 * (base_eig + base_eig.conj().T)
    psi_eig = vecs.conj().T @ psi0.amplitudes
    free_eig = np.exp(-1j * vals * (t1 - t0) / HBAR) * psi_eig
    psi_ref = QuantumState(psi0.space, vecs @ free_eig, t1)

    phi = spec.initial_state()
    coeffs = np.fft.fft(phi.amplitudes)
    pi_vals = fourier_momentum_values(spec.grid)
    sig = _significant_modes(coeffs, mode_cutoff)
    modes = np.empty((psi0.amplitudes.size, spec.grid.n_points), dtype=complex)
    modes[:, ~sig] = np.outer(psi_ref.amplitudes, coeffs[~sig])

    if engine == "exact":
        # interaction picture: the carried-along operator is constant, so
        # the coupling integrates to exp(-i G pi_k T_op^l) after free flight
        tau, w = np.linalg.eigh(base_eig)
        carrier = vecs @ w
        z = w.conj().T @ free_eig
        for k in np.nonzero(sig)[0]:
            phase = np.exp(-1j * coupling * pi_vals[k] * tau / HBAR)
            modes[:, k] = coeffs[k] * (carrier @ (phase * z))
    elif engine == "stepped":
        for k in np.nonzero(sig)[0]:
            v = _scheduled_eig_evolution(
                vals, base_eig, window, dt, coupling * pi_vals[k], psi_eig
            )
            modes[:, k] = coeffs[k] * (vecs @ v)
    else:
        raise ParameterError(f"unknown moment-meter engine {engine!r}")

    composite = _compose(modes)
    return _finish_run(
        spec, coupling, profile, window, f"region time^{order}", engine,
        composite, psi_ref, phi, psi0,
    )


# -- pointer statistics ----------------------------------------------------


def _postselected_pointer_amplitude(run: MeterRun, chi: QuantumState) -> np.ndarray:
    if tuple(chi.space) != tuple(run.reference_system_final.space):
        raise StructureError("postselector must live on the system space")
    return run.system_weight * (chi.amplitudes.conj() @ run.final_array())


def pointer_distribution(
    run: MeterRun,
    postselect: Optional[QuantumState] = None,
    label: Optional[str] = None,
    overlap_floor: float = 1e-8,
) -> PointerDistribution:
    """Pointer probability density, marginal or conditioned on a system
    postselection; the conditional one carries its branch probability."""
    grid = run.spec.grid
    dq = grid.dx
    if postselect is None:
        raw = run.system_weight * np.sum(np.abs(run.final_array()) ** 2, axis=0)
        prob = float(np.sum(raw) * dq)
    else:
        amp = _postselected_pointer_amplitude(run, postselect)
        raw = np.abs(amp) ** 2
        prob = float(np.sum(raw) * dq)
        if np.sqrt(prob) <= overlap_floor:
            raise DegeneratePostselectionError(
                "postselection branch weight below floor"
            )
    density = raw / prob
    q = grid.points
    mean = float(np.sum(q * density) * dq)
    variance = float(np.sum((q - mean) ** 2 * density) * dq)
    return PointerDistribution(
        grid=grid,
        density=density,
        mean=mean,
        variance=variance,
        postselection=label if postselect is not None else None,
        probability=prob,
    )


def survival_probability(run: MeterRun) -> float:
    """Probability that the system is still found in its unperturbed
    (freely evolved) state after the measurement."""
    dist = pointer_distribution(run, postselect=run.reference_system_final,
                                label="survival")
    return dist.probability / run.reference_system_final.norm() ** 2


def conditional_mean_sum(run: MeterRun, chi_family) -> tuple[float, float]:
    """Left and right side of the conditional-mean decomposition: the
    branch-weighted sum of conditional pointer means against the marginal
    mean.  Exact when the family is orthonormal and complete on the
    system's support."""
    total = pointer_distribution(run).mean
    acc = 0.0
    for chi in chi_family:
        amp = _postselected_pointer_amplitude(run, chi)
        raw = np.abs(amp) ** 2
        acc += float(np.sum(run.spec.grid.points * raw) * run.spec.grid.dx)
    return acc, total


def pointer_shift_fit(runs, postselect: Optional[QuantumState] = None):
    """Least-squares line through (coupling, conditional pointer mean) over
    a ladder of runs; returns (slope, intercept)."""
    if len(runs) < 2:
        raise ParameterError("need at least 2 runs to fit a line")
    g = np.array([r.coupling for r in runs], dtype=float)
    y = np.array([pointer_distribution(r, postselect).mean for r in runs])
    slope, intercept = np.polyfit(g, y, 1)
    return float(slope), float(intercept)


def meter_moment_readout(runs, postselect: Optional[QuantumState] = None):
    """Extrapolated conditional pointer shift per unit coupling over a
    descending ladder of runs; returns (value, residual).

    The shift is odd in the coupling for a real-profile pointer, so the
    leading ladder error is quadratic.
    """
    g = [r.coupling for r in runs]
    readouts = [pointer_distribution(r, postselect).mean / r.coupling for r in runs]
    value, _, residual = extrapolate_to_zero(g, readouts, 2)
    return float(value.real), residual


# -- derivative identities -------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    """Weak values recovered from pointer statistics by finite differences,
    with discrepancies against reference values where supplied."""

    pointer_weak_value: complex
    pointer_residual: float
    momentum_projected: dict
    momentum_residuals: dict
    discrepancies: dict = field(default_factory=dict)


def derivative_identity_check(
    run_factory: Callable[[float], MeterRun],
    strengths,
    chi: QuantumState,
    orders=(1, 2),
    reference: Optional[dict] = None,
) -> IdentityReport:
    """Recover conditional weak values from the pointer in two ways.

    (i) the coupling-derivative of the pointer-position matrix element
    projected on the zero-momentum pointer component, and (ii) for each
    requested order l, (i hbar / pi d/dG)^l of the fixed-small-momentum
    amplitude; both by central differences over a ladder of +-G runs
    produced by `run_factory`.
    """
    strengths = tuple(float(g) for g in strengths)
    if len(strengths) < 3:
        raise ParameterError("need at least 3 ladder strengths")
    runs = {g: run_factory(g) for g in strengths}
    runs_neg = {g: run_factory(-g) for g in strengths}

    probe = runs[strengths[0]]
    ref_sys = probe.reference_system_final
    den0 = inner_product(chi, ref_sys)
    if abs(den0) <= 1e-12:
        raise DegeneratePostselectionError("postselection overlap vanishes")
    grid = probe.spec.grid
    q = grid.points
    phi0 = probe.pointer_initial.amplitudes
    # zero-momentum projection = plain sum over the pointer axis
    denom_q = den0 * np.sum(phi0)

    pi1 = fourier_momentum_values(grid)[1]
    a0 = den0 * np.fft.fft(phi0)[1]

    # discrete response factor of the q-weighted readout: the q-sum applied
    # to the trigonometric interpolant of the discretely modulated pointer
    # differs from the ideal derivative at zero momentum by this computable
    # factor (close to 1); dividing by it makes the identity exact on the grid
    coeffs = np.fft.fft(phi0)
    response = complex(
        -1j
        * np.sum(coeffs * fourier_momentum_values(grid) * np.fft.ifft(q))
        / coeffs[0]
    )

    q_readouts = []
    mom_readouts = {l: [] for l in orders}
    for g in strengths:
        amp_p = _postselected_pointer_amplitude(runs[g], chi)
        amp_m = _postselected_pointer_amplitude(runs_neg[g], chi)
        nq = np.sum(q * amp_p) - np.sum(q * amp_m)
        q_readouts.append(nq / (2.0 * g * denom_q * response))
        ap = np.fft.fft(amp_p)[1]
        am = np.fft.fft(amp_m)[1]
        for l in orders:
            if l == 1:
                d = (ap - am) / (2.0 * g)
            elif l == 2:
                d = (ap - 2.0 * a0 + am) / g**2
            else:
                raise ParameterError("momentum-projected check implemented for l <= 2")
            mom_readouts[l].append((1j * HBAR / pi1) ** l * d / a0)

    pw, _, pres = extrapolate_to_zero(strengths, q_readouts, 2)
    mom_vals, mom_res = {}, {}
    for l in orders:
        v, _, r = extrapolate_to_zero(strengths, mom_readouts[l], 2)
        mom_vals[l] = v
        mom_res[l] = r

    disc = {}
    if reference:
        for l, ref_val in reference.items():
            if l in mom_vals:
                disc[l] = abs(mom_vals[l] - ref_val)
        if 1 in reference:
            disc["pointer"] = abs(pw - reference[1])
    return IdentityReport(
        pointer_weak_value=pw,
        pointer_residual=pres,
        momentum_projected=mom_vals,
        momentum_residuals=mom_res,
        discrepancies=disc,
    )


def lambda_moment_route(
    op: SojournOperator,
    system: Hamiltonian,
    psi0: QuantumState,
    chi: QuantumState,
    order: int,
    lambdas,
    dt: float = 0.05,
    engine: str = "stepped",
):
    """Moments from scalar-coupling derivatives: evolve under the system
    Hamiltonian plus lambda h(t) times the carried-along time-in-region
    operator and apply (i hbar d/dlambda)^l to the postselected amplitude
    ratio at lambda = 0 by central differences.  Returns (value, residual);
    the real part is the moment.
    """
    if order not in (1, 2):
        raise ParameterError("lambda route implemented for orders 1 and 2")
    lambdas = tuple(float(v) for v in lambdas)
    window = op.window
    _check_initial_time(psi0, window[0])
    _interaction_free_part(system, CouplingProfile.rectangular(*window))
    vals, vecs = system.eigensystem()
    base_eig = vecs.conj().T @ op.matrix.matrix @ vecs
    psi_eig = vecs.conj().T @ psi0.amplitudes
    free_eig = np.exp(-1j * vals * (window[1] - window[0]) / HBAR) * psi_eig
    chi_eig = vecs.conj().T @ chi.amplitudes
    w = psi0.cell_weight
    den = w * np.vdot(chi_eig, free_eig)
    if abs(den) <= 1e-12:
        raise DegeneratePostselectionError("postselection overlap vanishes")

    def ratio(lam: float) -> complex:
        if engine == "exact":
            tau, u = np.linalg.eigh(base_eig)
            v = u @ (np.exp(-1j * lam * tau / HBAR) * (u.conj().T @ free_eig))
        elif engine == "stepped":
            v = _scheduled_eig_evolution(vals, base_eig, window, dt, lam, psi_eig)
        else:
            raise ParameterError(f"unknown lambda-route engine {engine!r}")
        return complex(w * np.vdot(chi_eig, v) / den)

    readouts = []
    for lam in lambdas:
        rp, rm = ratio(lam), ratio(-lam)
        if order == 1:
            readouts.append(1j * HBAR * (rp - rm) / (2.0 * lam))
        else:
            readouts.append((1j * HBAR) ** 2 * (rp - 2.0 + rm) / lam**2)
    value, _, residual = extrapolate_to_zero(lambdas, readouts, 2)
    return value, residual
