"""The essential flow and the Gamma-quotient, numerically.

States are points ``(w, z)`` of M with ``w = t + i*height``; the flow
``phi_tau = Gamma_{0,-tau}`` and the deck transformation ``Gamma_{alpha,beta}``
are diagonal, so both are applied in closed form.  The RK4 mode exists only
to cross-check the pipeline.

CSV trajectories have the columns ``seed, tau, t, z1_re, z1_im, ...,
residual, deck_power``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import IO

import numpy as np
import sympy as sp

from .algebra import CoeffElem, variable_names
from .examples import ExampleSpec, check_quotient_parameters
from .exterior import DiagonalAction, DifferentialForm, VectorField
from .pseudohermitian import PHStructure, complete_structure
from .report import Check, Tolerances, VerificationReport
from .utils import rk4_step

RESIDUAL_TOLERANCE = 1e-9


class DynamicsError(Exception):
    """Base class for flow and quotient errors."""

    pass


class SectionUndefinedError(DynamicsError, ValueError):
    """The window coordinate vanishes, so the section cannot normalize the state."""

    pass


class EmptyRunError(DynamicsError, ValueError):
    """An attractor run was asked for zero seeds."""

    pass


class ResidualBreachError(DynamicsError):
    """A trajectory left M beyond the residual tolerance."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


@dataclass(eq=False)
class FlowState:
    """A point of M; ``residual = |height - F(z)|`` with ``M = {Im w = F(z)}``."""

    t: float
    z: np.ndarray
    height: float
    residual: float = 0.0
    deck_power: int = 0
    flagged: bool = False

    @property
    def coordinates(self) -> np.ndarray:
        """``(t, z1, ..., zn)`` as one complex array."""
        return np.concatenate([[self.t], self.z])


@dataclass(frozen=True)
class QuotientSpec:
    """The quotient by ``Gamma_{alpha,beta}`` with its fundamental domain.

    The section is the half-open annulus ``[c*m, c)`` on the modulus of the
    window coordinate, where m is the deck factor of that coordinate and
    ``c = window_center``.
    """

    action: DiagonalAction
    defining: CoeffElem
    alpha: sp.Rational
    beta: sp.Rational
    window_index: int | None = None
    window_center: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", sp.Rational(self.alpha))
        object.__setattr__(self, "beta", sp.Rational(self.beta))
        check_quotient_parameters(self.alpha, self.beta)

    @classmethod
    def from_example(cls, spec: ExampleSpec, window_center: float = 1.0) -> QuotientSpec:
        """The window coordinate is the one scaled by the deck map but fixed by the flow."""
        window = next(
            (
                j
                for j in range(spec.n)
                if spec.action.weights[j + 1][0] == 0 and spec.action.weights[j + 1][1] != 0
            ),
            None,
        )
        return cls(
            action=spec.action,
            defining=spec.defining,
            alpha=spec.alpha,
            beta=spec.beta,
            window_index=window,
            window_center=window_center,
        )

    @property
    def n(self) -> int:
        return self.action.n

    @property
    def flow_weights(self) -> np.ndarray:
        """s-weights of (t, z1, ..., zn): phi_tau scales x by e^{-k tau}."""
        return np.array([ks for ks, _ in self.action.weights], dtype=float)

    @property
    def deck_factors(self) -> np.ndarray:
        return np.array(self.action.scale_factors(float(self.alpha), float(self.beta)))

    @property
    def window(self) -> tuple[float, float]:
        if self.window_index is None:
            raise SectionUndefinedError("this quotient has no window coordinate")
        factor = self.deck_factors[self.window_index + 1]
        return self.window_center * factor, self.window_center

    def graph(self, z: np.ndarray) -> np.ndarray | float:
        """``F(z) = -defining(z)``, the height of M over z."""
        return np.real(-self.defining.evaluate(0.0, z))

    def state(self, t: float, z: np.ndarray) -> FlowState:
        """The point of M over ``(t, z)``; the height solves r = 0."""
        z = np.asarray(z, dtype=complex)
        return FlowState(t=float(t), z=z, height=float(self.graph(z)))

    def residual(self, state: FlowState) -> float:
        return float(abs(state.height - self.graph(state.z)))


def _with_residual(state: FlowState, quotient: QuotientSpec) -> FlowState:
    residual = quotient.residual(state)
    flagged = residual > RESIDUAL_TOLERANCE
    if flagged:
        logging.warning("flow state left M: residual %.3g", residual)
    return replace(state, residual=residual, flagged=flagged)


def flow(state: FlowState, tau: float, quotient: QuotientSpec) -> FlowState:
    """``phi_tau`` in closed form: each coordinate is scaled by ``e^{-k tau}``."""
    factors = np.exp(-quotient.flow_weights * tau)
    moved = replace(
        state,
        t=state.t * factors[0],
        height=state.height * factors[0],
        z=state.z * factors[1:],
    )
    return _with_residual(moved, quotient)


def flow_rk4(state: FlowState, tau: float, quotient: QuotientSpec, steps: int = 100) -> FlowState:
    """``phi_tau`` by integrating the generator with RK4 (cross-check mode)."""
    if steps < 1:
        raise DynamicsError("steps must be positive")
    rates = -np.concatenate([[quotient.flow_weights[0]], quotient.flow_weights])
    y = np.concatenate([[state.t, state.height], state.z]).astype(complex)
    h = tau / steps
    for _ in range(steps):
        y = rk4_step(lambda _, x: rates * x, 0.0, y, h)
    moved = replace(state, t=float(y[0].real), height=float(y[1].real), z=y[2:])
    return _with_residual(moved, quotient)


def deck(state: FlowState, quotient: QuotientSpec, power: int = 1) -> FlowState:
    """``Gamma_{alpha,beta}^power``."""
    factors = quotient.deck_factors**power
    moved = replace(
        state,
        t=state.t * factors[0],
        height=state.height * factors[0],
        z=state.z * factors[1:],
        deck_power=state.deck_power + power,
    )
    return _with_residual(moved, quotient)


def normalize(state: FlowState, quotient: QuotientSpec) -> tuple[FlowState, int]:
    """Move the state into the fundamental domain.

    Returns the normalized state and the unique power k with
    ``Gamma^k(state)`` in the window.

    Raises:
        SectionUndefinedError: if the window coordinate vanishes.
    """
    low, high = quotient.window
    modulus = abs(state.z[quotient.window_index])  # type: ignore[index]
    if modulus == 0 or not math.isfinite(modulus):
        raise SectionUndefinedError("section undefined; state near fixed-set fiber")
    factor = quotient.deck_factors[quotient.window_index + 1]  # type: ignore[operator]
    k = math.floor(1 - math.log(modulus / high) / math.log(factor))
    ## rounding at the window edges
    while modulus * factor**k >= high:
        k += 1
    while modulus * factor**k < low:
        k -= 1
    logging.debug("normalize: deck power %d", k)
    return deck(state, quotient, k), k


def commutation_defect(state: FlowState, quotient: QuotientSpec, tau: float) -> float:
    """``max |normalize(flow(x)) - flow(normalize(x))|`` over the coordinates,
    or infinity when the deck powers differ."""
    first, _ = normalize(flow(state, tau, quotient), quotient)
    second, _ = normalize(flow(normalize(state, quotient)[0], tau, quotient), quotient)
    if first.deck_power != second.deck_power:
        return math.inf
    return float(np.max(np.abs(first.coordinates - second.coordinates)))


def sample_seeds(quotient: QuotientSpec, count: int, rng: np.random.Generator) -> list[FlowState]:
    """Seeds on M: ``t`` and z in the unit box, the window coordinate in the window."""
    n = quotient.n
    states = []
    low, high = quotient.window if quotient.window_index is not None else (0.0, 1.0)
    for _ in range(count):
        t = rng.uniform(-1.0, 1.0)
        z = rng.uniform(-1.0, 1.0, n) + 1j * rng.uniform(-1.0, 1.0, n)
        if quotient.window_index is not None:
            modulus = rng.uniform(low, high)
            z[quotient.window_index] = modulus * np.exp(2j * np.pi * rng.uniform())
        states.append(quotient.state(t, z))
    return states


def _coordinate_names(n: int) -> list[str]:
    return ["t"] + [f"z{j}" for j in range(1, n + 1)]


@dataclass
class AttractorReport:
    """Decay-rate fits of ``log|x|`` against tau on ``[tau_end/2, tau_end]``.

    ``rates[name]`` is the mean over seeds of minus the fitted slope;
    ``r_squared[name]`` is the worst fit over seeds.
    """

    rates: dict[str, float]
    r_squared: dict[str, float]
    expected: dict[str, float]
    residual_max: float
    seeds: int
    params: dict
    samples: list[tuple] = field(default_factory=list, repr=False)
    contact_rate: sp.Rational | None = None

    @property
    def coordinate_volume_rate(self) -> float:
        """Fitted ``d/dtau log`` of the product of the coordinate scale factors."""
        return -sum(self.rates.values())

    @property
    def fitted_contact_volume_rate(self) -> float:
        """Fitted contraction of the real volume (complex coordinates count twice)."""
        return -(self.rates["t"] + 2 * sum(v for k, v in self.rates.items() if k != "t"))

    def rate_errors(self) -> dict[str, float]:
        return {name: abs(self.rates[name] - self.expected[name]) for name in self.rates}

    def passed(self, tolerances: Tolerances | None = None) -> bool:
        tolerances = tolerances or Tolerances()
        rates_ok = all(
            error <= tolerances.rate * max(1.0, abs(self.expected[name]))
            for name, error in self.rate_errors().items()
        )
        volume_ok = self.contact_rate is None or abs(
            self.fitted_contact_volume_rate - float(self.contact_rate)
        ) <= tolerances.rate * abs(float(self.contact_rate))
        return rates_ok and volume_ok and self.residual_max <= tolerances.flow_residual

    def to_json(self) -> dict:
        return {
            "rates": self.rates,
            "r_squared": self.r_squared,
            "expected": self.expected,
            "residual_max": self.residual_max,
            "seeds": self.seeds,
            "params": self.params,
            "coordinate_volume_rate": self.coordinate_volume_rate,
            "fitted_contact_volume_rate": self.fitted_contact_volume_rate,
            "contact_volume_rate": None if self.contact_rate is None else str(self.contact_rate),
        }

    def write_csv(self, stream: IO[str]) -> None:
        if not self.samples:
            return
        n = (len(self.samples[0]) - 5) // 2
        writer = csv.writer(stream, lineterminator="\n")
        header = ["seed", "tau", "t"]
        for j in range(1, n + 1):
            header += [f"z{j}_re", f"z{j}_im"]
        writer.writerow(header + ["residual", "deck_power"])
        for seed, tau, t, *rest in self.samples:
            *values, residual, power = rest
            writer.writerow(
                [seed, f"{tau:.6g}", f"{t:.17g}"]
                + [f"{v:.17g}" for v in values]
                + [f"{residual:.3e}", power]
            )


def _fit(tau: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Rate and R^2 of a straight-line fit of ``log|values|`` against tau."""
    logs = np.log(np.maximum(np.abs(values), np.finfo(float).tiny))
    slope, intercept = np.polyfit(tau, logs, 1)
    fitted = slope * tau + intercept
    total = float(np.sum((logs - logs.mean()) ** 2))
    residual = float(np.sum((logs - fitted) ** 2))
    r_squared = 1.0 if total <= 1e-24 else 1.0 - residual / total
    return -float(slope), r_squared


def attractor_report(
    quotient: QuotientSpec,
    seeds: int = 100,
    tau_end: float = 10.0,
    sample_dt: float = 0.1,
    seed: int = 0,
    contact_rate: sp.Rational | None = None,
) -> AttractorReport:
    """Flow seeded points and fit per-coordinate decay rates.

    Raises:
        EmptyRunError: for ``seeds == 0``.
        ResidualBreachError: if any sample leaves M.
    """
    if seeds <= 0:
        raise EmptyRunError("an attractor run needs at least one seed")
    if tau_end <= 0 or sample_dt <= 0:
        raise DynamicsError("tau_end and sample_dt must be positive")
    rng = np.random.default_rng(seed)
    names = _coordinate_names(quotient.n)
    tau = np.arange(0.0, tau_end + sample_dt / 2, sample_dt)
    fit_mask = tau >= tau_end / 2
    rates: dict[str, list[float]] = {name: [] for name in names}
    worst: dict[str, float] = {name: 1.0 for name in names}
    residual_max = 0.0
    samples: list[tuple] = []
    for index, start in enumerate(sample_seeds(quotient, seeds, rng)):
        start, _ = normalize(start, quotient) if quotient.window_index is not None else (start, 0)
        path = [flow(start, value, quotient) for value in tau]
        for value, state in zip(tau, path):
            if state.flagged:
                raise ResidualBreachError(
                    f"seed {index} left M at tau = {value:.3g}", state.residual
                )
            residual_max = max(residual_max, state.residual)
            samples.append(
                (index, float(value), state.t)
                + tuple(x for zj in state.z for x in (zj.real, zj.imag))
                + (state.residual, state.deck_power)
            )
        coords = np.array([state.coordinates for state in path])
        for k, name in enumerate(names):
            rate, r_squared = _fit(tau[fit_mask], coords[fit_mask, k])
            rates[name].append(rate)
            worst[name] = min(worst[name], r_squared)
    report = AttractorReport(
        rates={name: float(np.mean(values)) for name, values in rates.items()},
        r_squared=worst,
        expected={name: float(k) for name, k in zip(names, quotient.flow_weights)},
        residual_max=residual_max,
        seeds=seeds,
        params={
            "alpha": str(quotient.alpha),
            "beta": str(quotient.beta),
            "tau_end": tau_end,
            "sample_dt": sample_dt,
            "seed": seed,
        },
        samples=samples,
        contact_rate=contact_rate,
    )
    logging.debug("attractor run: %d seeds, %d samples each", seeds, len(tau))
    return report


def contact_volume_rate(spec: ExampleSpec, full: bool = False) -> sp.Rational:
    """The rate c(n+1) with ``L_X theta = c theta``, so ``L_X vol = c(n+1) vol``
    for ``vol = theta ^ (dtheta)^n``.

    With ``full`` the top-degree identity is also checked symbolically.

    Raises:
        DynamicsError: if X is not an infinitesimal homothety of theta.
    """
    theta = spec.theta()
    field_ = spec.generator
    factor = sp.Rational(-spec.homothety_weight)
    if theta.lie_derivative(field_) != theta * factor:
        raise DynamicsError(f"{spec.label}: L_X theta is not a multiple of theta")
    rate = factor * (spec.n + 1)
    if full:
        volume = volume_form(spec)
        if volume.lie_derivative(field_) != volume * rate:
            raise DynamicsError(f"{spec.label}: L_X vol != {rate} vol")
    return rate


def _first_nonzero(values: list) -> object:
    return next((value for value in values if value), 0)


def frame_bracket(
    structure: PHStructure, field_: VectorField
) -> tuple[list[list[CoeffElem]], list[CoeffElem]]:
    """Split ``[X, Z_a] = c_a^b Z_b + (theta and Zb parts)``.

    Returns ``c`` indexed ``[a][b]`` and the list of coefficients along
    ``T`` and the ``Zb_b``, which vanish when X preserves ``H^{1,0}``.
    """
    coefficients = []
    outside = []
    for frame_field in structure.frame:
        bracket = field_.bracket(frame_field)
        coefficients.append([structure.pair(form, bracket) for form in structure.coframe])
        outside.append(structure.pair(structure.theta, bracket))
        outside.extend(structure.pair(form, bracket) for form in structure.conj_coframe)
    return coefficients, outside


def _nonconstant_part(value: CoeffElem) -> CoeffElem:
    positional = variable_names(value.n)[: 2 * value.n + 1]
    return value - value.restrict(positional)


def verify_action_invariants(spec: ExampleSpec) -> VerificationReport:
    """Exact checks of the homothety identities for the example's action.

    ``r o Gamma = s^w r``, ``Gamma^* theta = s^w theta``, ``[X, X_alpha] = 0``,
    ``L_X theta = -w theta`` and ``[X, Z_a] = c_a^b Z_b`` with constant ``c``,
    where w is the weight of t.
    """
    report = VerificationReport(
        subject=spec.label, params={"alpha": str(spec.alpha), "beta": str(spec.beta)}
    )
    action = spec.action
    weight = spec.homothety_weight
    s_power = action.unit(0)
    report.add(
        Check.exact(
            f"r o Gamma = s^{weight} r",
            action.apply_coeff(spec.defining) - spec.defining * s_power,
            "homothety of the defining function",
        )
    )
    theta = spec.theta()
    report.add(
        Check.exact(
            f"Gamma^* theta = s^{weight} theta",
            action.pullback(theta) - theta * s_power,
            "homothety of the contact form",
        )
    )
    field_ = spec.generator
    report.add(
        Check.exact(
            "phi and Gamma commute",
            field_.bracket(action.generator("alpha")),
            "[X_beta, X_alpha] = 0",
        )
    )
    report.add(
        Check.exact(
            f"L_X theta = -{weight} theta",
            theta.lie_derivative(field_) + theta * weight,
            "infinitesimal homothety",
        )
    )
    structure = complete_structure(theta, spec.coframe())
    coefficients, outside = frame_bracket(structure, field_)
    report.add(
        Check.exact("[X, Z_a] in span{Z_b}", _first_nonzero(outside), "X preserves H^{1,0}")
    )
    report.add(
        Check.exact(
            "[X, Z_a] = c_a^b Z_b with constant c",
            _first_nonzero([_nonconstant_part(c) for row in coefficients for c in row]),
            "constant bracket coefficients",
        )
    )
    report.add(fixed_set_check(spec))
    return report


def fixed_set_check(spec: ExampleSpec) -> Check:
    """The fixed set ``{w = 0, z_j = 0 where the flow weight of z_j is nonzero}``
    lies on M and is pointwise fixed by the flow."""
    n = spec.n
    moving = ["t"] + [
        name
        for j in range(1, n + 1)
        if spec.action.weights[j][0]
        for name in (f"z{j}", f"zb{j}")
    ]
    on_m = spec.defining.restrict(moving)
    field_ = spec.generator
    still = [field_[k].restrict(moving) for k in range(2 * n + 1)]
    free = [f"z{j}" for j in range(1, n + 1) if not spec.action.weights[j][0]]
    label = "{" + ", ".join(["w = 0"] + [f"{name} free" for name in free]) + "}"
    residual = on_m or _first_nonzero(still)
    return Check.exact(f"fixed set {label} on M and fixed by phi", residual, "fixed set")


def volume_form(spec: ExampleSpec) -> DifferentialForm:
    """``theta ^ (dtheta)^n``."""
    theta = spec.theta()
    dtheta = theta.d()
    volume = theta
    for _ in range(spec.n):
        volume = volume.wedge(dtheta)
    return volume
