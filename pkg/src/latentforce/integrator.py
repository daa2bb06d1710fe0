"""Damped velocity Verlet simulation that drives states to likelihood maxima.

All latent coordinates (positions, alpha, beta, cut points) are integrated
together on a flat vector.  Positions have unit mass; scalar parameters
share a configurable mass.  Convergence is declared when no coordinate
moved more than ``tol`` in a step and the parameter forces have residuals
below ``10 * tol``, at which point the alpha forces equal the out-degree
residuals (and the beta forces the in-degree residuals) up to that bound.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from latentforce.forces import forces
from latentforce.graphs import CumulativeGraph, WeightedGraph
from latentforce.model import (
    LatentState,
    ModelConfig,
    default_cuts,
    log_prior,
    loglik,
)

__all__ = [
    "IntegratorConfig",
    "LayoutResult",
    "SimulationDiverged",
    "init_state",
    "step",
    "run_layout",
    "run_restarts",
]

# |alpha| or |beta| beyond this with no prior suggests a diverging MLE
# (for example a node adopted by everyone), which a weak prior cures.
PARAM_DIVERGENCE_BOUND = 50.0


class SimulationDiverged(RuntimeError):
    """The simulation left the numerically valid region."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Knobs of the force simulation.

    ``tol`` bounds the per-step max coordinate change at convergence;
    ``restarts`` runs the layout from consecutive seeds and keeps the
    highest-likelihood result.  ``fit_*`` flags freeze parameter blocks
    at their initial values (useful for fitting positions alone).
    ``workers`` parallelizes restarts; when None it falls back to the
    LATENTFORCE_THREADS environment variable, default 1.
    """

    dt: float = 0.05
    damping: float = 0.9
    max_iters: int = 5000
    tol: float = 1e-4
    param_mass: float = 1.0
    restarts: int = 5
    dim: int = 2
    fit_alpha: bool = True
    fit_beta: bool = True
    fit_cuts: bool = True
    deterministic: bool = False
    workers: int | None = None

    def validate(self) -> "IntegratorConfig":
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must be in (0, 1]")
        if self.max_iters < 0 or self.restarts < 1 or self.dim < 1:
            raise ValueError("max_iters must be >= 0, restarts >= 1, dim >= 1")
        if self.tol <= 0 or self.param_mass <= 0:
            raise ValueError("tol and param_mass must be positive")
        return self

    def resolve_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        return max(1, int(os.environ.get("LATENTFORCE_THREADS", "1")))


@dataclass(eq=False)
class LayoutResult:
    """Outcome of one simulated layout.

    ``loglik`` is the plain model log-likelihood; ``log_posterior`` adds
    the Gaussian log-prior when one was enabled (they are equal when the
    prior is off).
    """

    state: LatentState
    loglik: float
    log_posterior: float
    iterations: int
    converged: bool
    seed: int


def init_state(graph, model: ModelConfig, config: IntegratorConfig, seed: int) -> LatentState:
    """Seed-determined starting state.

    Positions are i.i.d. standard normal in R^dim, alpha and beta start
    at zero, and weighted cut points start evenly spaced from +1 to -1.
    """
    model.validate()
    config.validate()
    rng = np.random.default_rng(seed)
    n = graph.n_nodes
    positions = rng.standard_normal((n, config.dim))
    alpha = np.zeros(n)
    if model.family == "cumulative":
        if not isinstance(graph, CumulativeGraph):
            raise TypeError("cumulative family expects a CumulativeGraph")
        beta = np.zeros(graph.n_actions)
    else:
        beta = np.zeros(n)
    if model.family == "weighted":
        if not isinstance(graph, WeightedGraph):
            raise TypeError("weighted family expects a WeightedGraph")
        cuts = default_cuts(graph.n_levels)
    else:
        cuts = np.empty(0)
    return LatentState(positions, alpha, beta, cuts)


def step(x, v, f, evaluate, mass, dt, damping):
    """One damped velocity Verlet update on flat coordinate vectors.

    ``evaluate`` maps a coordinate vector to its force vector.  Returns
    ``(x_new, v_new, f_new)`` so the force evaluated here is reused as the
    starting force of the next step (one evaluation per step).
    """
    x_new = x + v * dt + (0.5 * dt * dt) * (f / mass)
    f_new = evaluate(x_new)
    v_new = damping * (v + (0.5 * dt) * (f + f_new) / mass)
    return x_new, v_new, f_new


def _layout_vectors(state: LatentState, config: IntegratorConfig):
    n, d = state.positions.shape
    nb = state.beta.size
    nc = state.cuts.size
    total = n * d + n + nb + nc
    mass = np.empty(total)
    mass[: n * d] = 1.0
    mass[n * d :] = config.param_mass
    active = np.ones(total, dtype=bool)
    if not config.fit_alpha:
        active[n * d : n * d + n] = False
    if not config.fit_beta:
        active[n * d + n : n * d + n + nb] = False
    if not config.fit_cuts and nc:
        active[total - nc :] = False
    return mass, active, n * d, nc


def run_layout(graph, model: ModelConfig, config: IntegratorConfig, seed: int) -> LayoutResult:
    """Simulate from a seeded start until convergence or ``max_iters``.

    Raises :class:`SimulationDiverged` if the state leaves the valid
    region (non-finite coordinates, or cut points crossing); warns when
    alpha/beta grow past +-50 with the prior disabled, since that
    indicates a diverging maximum-likelihood estimate.
    """
    model.validate()
    config.validate()
    template = init_state(graph, model, config, seed)
    x = template.to_vector()
    if x.size == 0:
        return LayoutResult(template, 0.0, 0.0, 0, True, seed)
    mass, active, n_pos_coords, n_cuts = _layout_vectors(template, config)
    prior_on = model.prior.enabled

    def evaluate(vec):
        ff = forces(graph, template.with_vector(vec), model)
        fv = ff.to_vector()
        fv[~active] = 0.0
        return fv

    v = np.zeros_like(x)
    f = evaluate(x)
    iterations = 0
    converged = False
    warned_divergence = False
    force_tol = 10.0 * config.tol
    for iterations in range(1, config.max_iters + 1):
        x_new, v, f = step(x, v, f, evaluate, mass, config.dt, config.damping)
        if not np.all(np.isfinite(x_new)):
            raise SimulationDiverged(
                f"non-finite coordinates after {iterations} iterations "
                f"(seed {seed}); try a smaller dt than {config.dt}"
            )
        if n_cuts > 1:
            cuts_now = x_new[-n_cuts:]
            if not np.all(np.diff(cuts_now) < 0):
                raise SimulationDiverged(
                    f"cut points crossed after {iterations} iterations "
                    f"(seed {seed}); try a smaller dt than {config.dt}"
                )
        if not prior_on and not warned_divergence:
            params = x_new[n_pos_coords:]
            if params.size and np.max(np.abs(params)) > PARAM_DIVERGENCE_BOUND:
                warnings.warn(
                    "alpha/beta magnitudes exceeded 50 with the prior disabled; "
                    "the maximum-likelihood estimate may diverge -- consider "
                    "enabling the Gaussian prior",
                    RuntimeWarning,
                    stacklevel=2,
                )
                warned_divergence = True
        delta = np.max(np.abs(x_new - x))
        x = x_new
        if delta < config.tol:
            param_forces = f[n_pos_coords:]
            if param_forces.size == 0 or np.max(np.abs(param_forces)) < force_tol:
                converged = True
                break
    final = template.with_vector(x.copy())
    if not prior_on and final.n_nodes:
        final.positions = final.positions - final.positions.mean(axis=0)
    final = LatentState(final.positions.copy(), final.alpha.copy(),
                        final.beta.copy(), final.cuts.copy())
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        ll = loglik(graph, final, model)
    lp = ll + (log_prior(final, model.prior) if prior_on else 0.0)
    return LayoutResult(final, float(ll), float(lp), iterations, converged, seed)


def run_restarts(
    graph,
    model: ModelConfig,
    config: IntegratorConfig,
    seed: int,
    return_all: bool = False,
):
    """Run ``config.restarts`` layouts from seeds ``seed, seed+1, ...``.

    Returns the result with the highest plain log-likelihood (ties go to
    the lower seed).  Individual diverging restarts are tolerated; if
    every restart diverges the last error is re-raised.  With
    ``return_all=True`` returns ``(best, records)`` where records is a
    list of ``(seed, result_or_None, error_message_or_None)``.
    """
    model.validate()
    config.validate()
    seeds = [seed + k for k in range(config.restarts)]

    def one(s):
        try:
            return run_layout(graph, model, config, s), None
        except SimulationDiverged as exc:
            return None, str(exc)

    workers = config.resolve_workers()
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, seeds))
    else:
        outcomes = [one(s) for s in seeds]
    records = [(s, res, err) for s, (res, err) in zip(seeds, outcomes)]
    best = None
    for s, res, _ in records:
        if res is not None and (best is None or res.loglik > best.loglik):
            best = res
    if best is None:
        failures = "; ".join(err for _, _, err in records if err)
        raise SimulationDiverged(f"all {len(seeds)} restarts diverged: {failures}")
    if return_all:
        return best, records
    return best
