"""Constrained direct minimization of the element-functional total.

The cable/membrane energy is minimized while every strut is held at its
prescribed length by a midpoint-preserving geometric projection applied at
each iterate, so all reported states satisfy the constraints. Stationarity
is measured on the projection of the gradient onto the constraint tangent
space, and the strut force multipliers are recovered afterwards by a small
least-squares fit.

Two iteration schemes are available: backtracking gradient descent (default,
deterministic, monotone in energy) and dynamic relaxation with kinetic
damping, selectable per solve.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import functionals
from .geometry import DegenerateGeometry, EPS_LENGTH, member_lengths
from .model import Model

logger = logging.getLogger("tensiform")

METHOD_DESCENT = "descent"
METHOD_DYNRELAX = "dynrelax"

# Constraint satisfaction required of every reported iterate.
CONSTRAINT_RTOL = 1e-9


@dataclass(frozen=True)
class RandomInit:
    """Uniform random start in [-range, range] per free coordinate."""

    range: float = 2.5


@dataclass(frozen=True)
class GivenInit:
    coords: np.ndarray


@dataclass(frozen=True)
class StepControl:
    initial_step: float | None = None  # default 1e-2 * (mean prescribed length or 1)
    backtrack: float = 0.5
    damping: float = 0.0  # viscous damping for dynamic relaxation


@dataclass
class SolveOptions:
    max_iterations: int = 200_000
    gradient_tolerance: float = 1e-8
    seed: int = 0
    init: RandomInit | GivenInit = field(default_factory=RandomInit)
    step_control: StepControl = field(default_factory=StepControl)
    method: str = METHOD_DESCENT
    wall_clock_limit: float | None = None  # seconds; None = unlimited
    trace_every: int = 1


@dataclass
class ConvergedState:
    coords: np.ndarray
    forces: functionals.GeneralizedForces
    energy: float
    residual_norm: float
    constraint_violation: float
    iterations: int
    converged: bool
    trace: np.ndarray  # (k, 2) rows of (energy, residual_norm)
    stop_reason: str = "converged"


@dataclass
class MultiplierFit:
    lambdas: np.ndarray
    residual_norm: float  # post-fit infinity norm of the equilibrium residual
    rank: int


def random_initialization(n: int, range_: float, seed: int) -> np.ndarray:
    """Deterministic uniform coordinates in [-range_, range_]."""
    if range_ <= 0:
        raise ValueError(f"range must be > 0, got {range_}")
    return np.random.default_rng(seed).uniform(-range_, range_, n)


def project_strut_lengths(coords: np.ndarray, model: Model) -> np.ndarray:
    """Rescale each strut about its midpoint to the prescribed length.

    Struts with one fixed endpoint pivot about that endpoint instead; fully
    fixed struts cannot move and are skipped. Struts already within a tenth
    of the constraint tolerance are left bitwise untouched, which makes the
    projection exactly idempotent and keeps it from injecting rounding noise
    into converged configurations. Exact in one pass when struts share no
    nodes (sweeps repeat otherwise).
    """
    edges = model.strut_edge_array
    if edges.shape[0] == 0:
        return np.asarray(coords, dtype=float).copy()

    dof = model.dof_map
    positions = model.full_positions(coords)
    lbar = model.strut_lengths_bar
    fixed = model.fixed_mask
    tables = functionals._tables(model)

    fix_i = fixed[edges[:, 0]]
    fix_j = fixed[edges[:, 1]]
    movable = ~(fix_i & fix_j)
    sweeps = 1 if tables.struts_disjoint else 64

    for _ in range(sweeps):
        d = positions[edges[:, 1]] - positions[edges[:, 0]]
        lengths = np.sqrt(np.einsum("ij,ij->i", d, d))
        short = np.flatnonzero(movable & (lengths <= EPS_LENGTH))
        if short.size:
            strut_ids = [m.id for m in model.struts]
            raise DegenerateGeometry(f"member {strut_ids[int(short[0])]}: "
                                     "zero-length strut cannot be projected")
        violated = movable & (np.abs(lengths - lbar) > 0.1 * CONSTRAINT_RTOL * lbar)
        if not np.any(violated):
            break
        units = d[violated] / lengths[violated, None]
        half = 0.5 * lbar[violated, None] * units
        e0, e1 = edges[violated, 0], edges[violated, 1]
        vfix_i, vfix_j = fix_i[violated], fix_j[violated]
        both = ~vfix_i & ~vfix_j
        if np.any(both):
            mid = 0.5 * (positions[e0[both]] + positions[e1[both]])
            positions[e0[both]] = mid - half[both]
            positions[e1[both]] = mid + half[both]
        if np.any(vfix_i):
            positions[e1[vfix_i]] = positions[e0[vfix_i]] + 2.0 * half[vfix_i]
        if np.any(vfix_j):
            positions[e0[vfix_j]] = positions[e1[vfix_j]] - 2.0 * half[vfix_j]

    return positions[dof.free_nodes].reshape(-1)


def _fit_multipliers(A: np.ndarray, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Least-squares lambdas minimizing |grad + A^T lambda|; returns residual too.

    One step of iterative refinement keeps the residual orthogonal to the
    constraint normals to far below the solver backward error; without it the
    leftover normal component (scaled by large multipliers) would contaminate
    line-search slopes near convergence. Rank-deficient systems fall back to
    the minimal-norm lstsq solution.
    """
    r = A.shape[0]
    if r == 0:
        return np.zeros(0), grad, 0
    gram = A @ A.T
    try:
        factor = cho_factor(gram)

        def solve(rhs):
            return cho_solve(factor, rhs)

        rank = r
    except np.linalg.LinAlgError:
        pseudo = np.linalg.pinv(gram)  # minimal-norm lambdas on rank deficiency
        rank = int(np.linalg.matrix_rank(A))

        def solve(rhs):
            return pseudo @ rhs

    lambdas = solve(-(A @ grad))
    residual = grad + A.T @ lambdas
    correction = solve(-(A @ residual))
    lambdas = lambdas + correction
    residual = residual + A.T @ correction
    return lambdas, residual, rank


def recover_multipliers(model: Model, coords: np.ndarray,
                        forces: functionals.GeneralizedForces) -> MultiplierFit:
    """Strut multipliers closing the equilibrium residual in the least-squares sense.

    The per-iteration fit trusts the Cholesky factorization for speed; this
    diagnostic entry point checks the rank explicitly, because a numerically
    semi-definite Gram matrix can slip through Cholesky and silently produce
    an arbitrary load split between dependent struts.
    """
    grad, _ = functionals.total_gradient(model, coords)
    _, A = functionals.strut_gradient_matrix(model, coords)
    r = A.shape[0]
    rank = int(np.linalg.matrix_rank(A)) if r else 0
    if rank == r:
        lambdas, residual, _ = _fit_multipliers(A, grad)
    else:
        warnings.warn(f"strut gradient matrix is rank deficient ({rank} < {r}); "
                      "returning the minimal-norm multipliers", stacklevel=2)
        pseudo = np.linalg.pinv(A @ A.T)
        lambdas = pseudo @ (-(A @ grad))
        residual = grad + A.T @ lambdas
        correction = pseudo @ (-(A @ residual))
        lambdas = lambdas + correction
        residual = residual + A.T @ correction
    forces.strut_multipliers = lambdas
    return MultiplierFit(lambdas=lambdas,
                         residual_norm=float(np.max(np.abs(residual), initial=0.0)),
                         rank=rank)


def _constraint_violation(model: Model, coords: np.ndarray) -> float:
    edges = model.strut_edge_array
    if edges.shape[0] == 0:
        return 0.0
    lengths = member_lengths(model.full_positions(coords), edges)
    return float(np.max(np.abs(lengths - model.strut_lengths_bar)))


def _length_scale(model: Model) -> float:
    lbar = model.strut_lengths_bar
    return float(np.mean(lbar)) if lbar.size else 1.0


class _GradientEvaluator:
    """total_gradient with the jitter-and-retry guard for degenerate members."""

    def __init__(self, model: Model, seed: int, scale: float):
        self.model = model
        self.rng = np.random.default_rng(seed + 0x5EED)
        self.scale = scale
        self.events = 0

    def __call__(self, coords: np.ndarray):
        x = coords
        for attempt in range(4):
            try:
                grad, forces = functionals.total_gradient(self.model, x)
                return x, grad, forces
            except DegenerateGeometry as err:
                if attempt == 3:
                    raise
                self.events += 1
                logger.info("degenerate geometry (%s); jittering and retrying", err)
                x = x + self.rng.normal(scale=1e-6 * self.scale, size=x.shape)
                x = project_strut_lengths(x, self.model)
        raise AssertionError("unreachable")


def minimize_constrained(model: Model, options: SolveOptions | None = None) -> ConvergedState:
    """Find a stationary point of the total energy on the strut-length manifold.

    Non-convergence within the iteration budget is reported through the
    returned state (converged=False), not raised.
    """
    options = options or SolveOptions()
    if not options.gradient_tolerance > 0:
        raise ValueError(f"gradient tolerance must be > 0, got {options.gradient_tolerance}")
    dof = model.dof_map

    if isinstance(options.init, GivenInit):
        x = np.array(options.init.coords, dtype=float).reshape(-1)
        if x.size != dof.n:
            raise ValueError(f"init coords have {x.size} entries, expected {dof.n}")
    else:
        x = random_initialization(dof.n, options.init.range, options.seed)

    scale_len = _length_scale(model)
    evaluate = _GradientEvaluator(model, options.seed, scale_len)

    for attempt in range(4):
        try:
            x = project_strut_lengths(x, model)
            break
        except DegenerateGeometry:
            if attempt == 3:
                raise
            x = x + evaluate.rng.normal(scale=1e-6 * scale_len, size=x.shape)

    if options.method == METHOD_DESCENT:
        return _descend(model, x, options, evaluate, scale_len)
    if options.method == METHOD_DYNRELAX:
        return _dynamic_relaxation(model, x, options, evaluate, scale_len)
    raise ValueError(f"unknown method {options.method!r}")


def _finish(model: Model, x, forces, energy, residual_norm, iterations, converged,
            trace, lambdas, stop_reason) -> ConvergedState:
    forces.strut_multipliers = lambdas
    return ConvergedState(
        coords=x,
        forces=forces,
        energy=energy,
        residual_norm=residual_norm,
        constraint_violation=_constraint_violation(model, x),
        iterations=iterations,
        converged=converged,
        trace=np.asarray(trace, dtype=float).reshape(-1, 2),
        stop_reason=stop_reason,
    )


def _descend(model: Model, x, options: SolveOptions, evaluate, scale_len) -> ConvergedState:
    sc = options.step_control
    step0 = sc.initial_step if sc.initial_step is not None else 1e-2 * scale_len
    step = step0
    deadline = (time.monotonic() + options.wall_clock_limit
                if options.wall_clock_limit else None)

    x, grad, forces = evaluate(x)
    energy = functionals.total_energy(model, x)
    _, A = functionals.strut_gradient_matrix(model, x)
    lambdas, residual, _ = _fit_multipliers(A, grad)
    rnorm = float(np.max(np.abs(residual), initial=0.0))
    scale = functionals.force_scale(forces)
    trace = [(energy, rnorm)]

    converged = rnorm <= options.gradient_tolerance * scale
    iterations = 0
    prev_x = None
    prev_residual = None
    best_rnorm = rnorm
    last_progress = 0
    stop_reason = "converged" if converged else "max_iterations"

    while not converged and iterations < options.max_iterations:
        iterations += 1

        direction = -residual
        slope = -float(residual @ residual)  # directional derivative along direction
        accepted = False
        x_new = x
        energy_new = energy
        while step > 1e-20 * step0:
            try:
                x_new = project_strut_lengths(x + step * direction, model)
                # The factored difference stays accurate when the decrease is
                # far below the rounding floor of the total energy itself.
                energy_new, decrease = functionals.trial_energy(model, x, x_new)
            except DegenerateGeometry:
                step *= sc.backtrack  # trial collapsed a strut; shorten and retry
                continue
            if decrease <= 1e-4 * step * slope:
                accepted = True
                break
            step *= sc.backtrack
        if not accepted or np.array_equal(x_new, x):
            stop_reason = "line_search_floor"
            break  # no representable descent step remains

        prev_x, prev_residual = x, residual
        x, energy = x_new, energy_new

        x, grad, forces = evaluate(x)
        _, A = functionals.strut_gradient_matrix(model, x)
        lambdas, residual, _ = _fit_multipliers(A, grad)
        rnorm = float(np.max(np.abs(residual), initial=0.0))
        scale = functionals.force_scale(forces)
        if iterations % options.trace_every == 0:
            trace.append((energy, rnorm))
        converged = rnorm <= options.gradient_tolerance * scale

        if rnorm < 0.999 * best_rnorm:
            best_rnorm = rnorm
            last_progress = iterations
        elif iterations - last_progress > 2000:
            stop_reason = "stagnation"
            break  # residual stagnated well before the tolerance

        # Barzilai-Borwein guess for the next step, kept inside the
        # backtracking safeguard so energy stays monotone.
        s = x - prev_x
        y = residual - prev_residual
        sy = float(s @ y)
        if sy > 0:
            step = min(max(float(s @ s) / sy, 1e-8 * step0), 1e8 * step0)
        else:
            step = min(step * 2.0, 1e8 * step0)

        if deadline is not None and iterations % 64 == 0 and time.monotonic() > deadline:
            logger.warning("wall clock limit reached after %d iterations", iterations)
            stop_reason = "wall_clock"
            break

    if converged:
        stop_reason = "converged"
    if trace[-1] != (energy, rnorm):
        trace.append((energy, rnorm))
    return _finish(model, x, forces, energy, rnorm, iterations, converged, trace, lambdas,
                   stop_reason)


def _dynamic_relaxation(model: Model, x, options: SolveOptions, evaluate,
                        scale_len) -> ConvergedState:
    sc = options.step_control
    deadline = (time.monotonic() + options.wall_clock_limit
                if options.wall_clock_limit else None)

    x, grad, forces = evaluate(x)
    energy = functionals.total_energy(model, x)
    _, A = functionals.strut_gradient_matrix(model, x)
    lambdas, residual, _ = _fit_multipliers(A, grad)
    rnorm = float(np.max(np.abs(residual), initial=0.0))
    scale = functionals.force_scale(forces)
    trace = [(energy, rnorm)]

    # Pseudo-time step sized so the first displacement is ~1e-3 of the model scale.
    if sc.initial_step is not None:
        dt = sc.initial_step
    else:
        dt = np.sqrt(1e-3 * scale_len / max(rnorm, 1e-30))
    velocity = np.zeros_like(x)
    kinetic_prev = 0.0
    reset_rnorm = rnorm
    best_x, best_energy = x.copy(), energy

    converged = rnorm <= options.gradient_tolerance * scale
    iterations = 0
    stop_reason = "converged" if converged else "max_iterations"
    while not converged and iterations < options.max_iterations:
        iterations += 1

        velocity = (1.0 - sc.damping) * velocity - dt * residual
        try:
            x = project_strut_lengths(x + dt * velocity, model)
        except DegenerateGeometry:
            dt *= 0.5  # the step collapsed a strut; damp the motion and retry
            velocity[:] = 0.0
            kinetic_prev = 0.0
            continue
        x, grad, forces = evaluate(x)
        energy = functionals.total_energy(model, x)
        _, A = functionals.strut_gradient_matrix(model, x)
        lambdas, residual, _ = _fit_multipliers(A, grad)
        rnorm = float(np.max(np.abs(residual), initial=0.0))
        scale = functionals.force_scale(forces)
        if iterations % options.trace_every == 0:
            trace.append((energy, rnorm))

        kinetic = 0.5 * float(velocity @ velocity)
        if kinetic < kinetic_prev:
            # Kinetic peak passed: drop the accumulated motion and restart.
            velocity[:] = 0.0
            kinetic = 0.0
            reset_rnorm = rnorm
        kinetic_prev = kinetic

        if rnorm > 50.0 * max(reset_rnorm, 1e-30):
            # Diverging oscillation: shrink the time step and restart from the best state.
            dt *= 0.5
            velocity[:] = 0.0
            kinetic_prev = 0.0
            x = best_x.copy()
            x, grad, forces = evaluate(x)
            energy = functionals.total_energy(model, x)
            _, A = functionals.strut_gradient_matrix(model, x)
            lambdas, residual, _ = _fit_multipliers(A, grad)
            rnorm = float(np.max(np.abs(residual), initial=0.0))
            reset_rnorm = rnorm

        if energy < best_energy:
            best_x, best_energy = x.copy(), energy

        converged = rnorm <= options.gradient_tolerance * scale
        if deadline is not None and iterations % 64 == 0 and time.monotonic() > deadline:
            logger.warning("wall clock limit reached after %d iterations", iterations)
            stop_reason = "wall_clock"
            break

    if converged:
        stop_reason = "converged"
    if trace[-1] != (energy, rnorm):
        trace.append((energy, rnorm))
    return _finish(model, x, forces, energy, rnorm, iterations, converged, trace, lambdas,
                   stop_reason)
