"""Thermodynamic limits: variational pressure, closed forms and observables.

The annealed pressure is the supremum over the plus-spin fraction ``x`` of

    lambda(x) = -x log x - (1-x) log(1-x)
                + a1 x^2 + a2 (1-x)^2 + a3 x (1-x) + B(+1) x - B(-1) (1-x)

with ``a1 = C(+,+)(e^beta - 1)/2``, ``a2 = C(-,-)(e^beta - 1)/2`` and
``a3 = C(-,+)(e^-beta - 1)``. The closed form is this objective at
``x = 1/2`` under the field constraint; it is the true supremum only while
the symmetric point stays the global maximizer.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import xlogy

from .errors import DEGENERATE, ConstraintLost, KernelInvalid, NoCriticalPoint, NoRoot
from .measures import rate_function
from .model import (
    EffectiveKernel,
    Kernel,
    ModelParams,
    effective_kernel,
    energetic_preference_residual,
    find_root,
    solve_field,
)

LOG2 = math.log(2.0)
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class VariationalCoeffs:
    a1: float
    a2: float
    a3: float


def variational_coeffs(eff: EffectiveKernel, beta: float) -> VariationalCoeffs:
    up = math.expm1(beta)
    return VariationalCoeffs(0.5 * eff.c_pp * up, 0.5 * eff.c_mm * up, eff.c_pm * math.expm1(-beta))


def lambda_objective(x, coeffs: VariationalCoeffs, params: ModelParams):
    """Entropy plus quadratic energy of a plus-spin fraction ``x``; vectorizes over ``x``."""
    x = np.asarray(x, dtype=float)
    y = 1.0 - x
    entropy = -xlogy(x, x) - xlogy(y, y)
    energy = (
        coeffs.a1 * x * x + coeffs.a2 * y * y + coeffs.a3 * x * y
        + params.field_plus * x - params.field_minus * y
    )
    out = entropy + energy
    return float(out) if out.ndim == 0 else out


def lambda_derivative(x: float, coeffs: VariationalCoeffs, params: ModelParams) -> float:
    if x <= 0.0:
        return math.inf
    if x >= 1.0:
        return -math.inf
    return (
        math.log((1.0 - x) / x)
        + 2 * coeffs.a1 * x - 2 * coeffs.a2 * (1.0 - x) + coeffs.a3 * (1.0 - 2 * x)
        + params.field_plus + params.field_minus
    )


def _golden_max(fn, a, b, tol=1e-10):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def maximize_objective(coeffs: VariationalCoeffs, params: ModelParams, grid_points: int = 2001) -> tuple[float, float]:
    """Global maximum ``(value, x)`` of :func:`lambda_objective` on ``[0, 1]``.

    A uniform grid locates the best cell, golden-section search narrows it
    to 1e-10 and a bisection on the derivative pins the stationary point.
    Values within rounding of the symmetric point's value resolve to 1/2.
    """
    grid = np.linspace(0.0, 1.0, grid_points)
    vals = lambda_objective(grid, coeffs, params)
    best = vals.max()
    ties = np.flatnonzero(vals >= best)
    i = int(ties[np.argmin(np.abs(grid[ties] - 0.5))])
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid_points - 1)]

    def fn(x):
        return lambda_objective(x, coeffs, params)

    x = _golden_max(fn, a, b)
    da, db = lambda_derivative(a, coeffs, params), lambda_derivative(b, coeffs, params)
    if da > 0 > db:
        lo, hi = a, b
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            dm = lambda_derivative(mid, coeffs, params)
            if dm == 0:
                lo = hi = mid
                break
            if dm > 0:
                lo = mid
            else:
                hi = mid
        polished = 0.5 * (lo + hi)
        if fn(polished) >= fn(x):
            x = polished
    candidates = [(fn(x), float(x)), (float(vals[i]), float(grid[i]))]
    value, x = max(candidates, key=lambda t: t[0])
    half = fn(0.5)
    if half >= value - 1e-13 * max(1.0, abs(value)):
        return half, 0.5
    return value, x


def variational_pressure(kernel: Kernel, params: ModelParams) -> tuple[float, float]:
    """``(phi, x_star)``: the supremum of the objective and its maximizer."""
    eff = effective_kernel(kernel, params)
    return maximize_objective(variational_coeffs(eff, params.beta), params)


def closed_form_pressure(kernel: Kernel, params: ModelParams, warn: bool = True) -> float:
    """Pressure at the symmetric point, valid on the field constraint below symmetry breaking."""
    if warn:
        residual = energetic_preference_residual(kernel, params)
        if abs(residual) > 1e-8:
            warnings.warn(f"field constraint violated (residual {residual:.3g}); closed form may not apply")
    eff = effective_kernel(kernel, params)
    b = params.beta
    return (
        LOG2
        + 0.25 * (math.expm1(b) * eff.c_pp + math.expm1(-b) * eff.c_pm)
        + 0.25 * (3 * params.field_plus - params.field_minus)
    )


def stationarity_pair(x: float, beta: float, eff: EffectiveKernel) -> np.ndarray:
    """Pair measure maximizing the inner problem at plus fraction ``x``.

    Equal-spin entries are ``e^beta`` times the reference ``C x x``-type
    product and mixed entries ``e^-beta`` times it. Indexed by spin position.
    """
    y = 1.0 - x
    up, down = math.exp(beta), math.exp(-beta)
    mixed = down * eff.c_pm * x * y
    return np.array([[up * eff.c_mm * y * y, mixed], [mixed, up * eff.c_pp * x * x]])


def varadhan_objective(x: float, pi, kernel: Kernel, params: ModelParams) -> float:
    """Two-level objective ``log 2 + energy(x, pi) - I(omega_x, pi)`` under a uniform spin law."""
    eff = effective_kernel(kernel, params)
    pi = np.asarray(pi, dtype=float)
    diag = pi[0, 0] + pi[1, 1]
    off = pi[0, 1] + pi[1, 0]
    omega = (1.0 - x, x)
    energy = 0.5 * params.beta * (diag - off) + params.field_plus * x - params.field_minus * (1.0 - x)
    return LOG2 + energy - rate_function(omega, pi, (0.5, 0.5), eff)


def magnetization_paper(kernel: Kernel, params: ModelParams):
    """Closed-form magnetization; :data:`DEGENERATE` when its denominator vanishes."""
    e = effective_kernel(kernel, params)
    b = params.beta
    up, down = math.exp(b), math.exp(-b)
    num = up * e.c_pp - down * e.c_pm + math.expm1(b) * e.d_pp + math.expm1(-b) * e.d_pm
    den = up * (e.c_pp - e.c_mm) + math.expm1(b) * (e.d_pp - e.d_mm)
    if abs(den) < 1e-12:
        return DEGENERATE
    return 0.5 - num / den


def internal_energy_paper(kernel: Kernel, params: ModelParams) -> float:
    e = effective_kernel(kernel, params)
    b = params.beta
    return -0.25 * (
        e.c_mm * math.exp(b) - e.c_pm * math.exp(-b)
        + math.expm1(-b) * e.d_pm + math.expm1(b) * e.d_mm
    )


def specific_heat_paper(kernel: Kernel, params: ModelParams) -> float:
    """The closed-form specific heat exactly as printed, duplicated term included."""
    e = effective_kernel(kernel, params)
    b = params.beta
    up, down = math.exp(b), math.exp(-b)
    bracket = (
        e.c_mm * up + e.c_pm * up + up * e.d_mm - 2 * down * e.d_pm
        + math.expm1(-b) * e.d_pm + math.expm1(b) * e.d_mm + up * e.d_mm
    )
    return 0.25 * b * b * bracket


@dataclass(frozen=True)
class Observables:
    M: float
    U: float
    heat: float
    chi: float
    constrained: bool


def _pressure_fn(kind, kernel):
    if kind == "closed_form":
        return lambda p: closed_form_pressure(kernel, p, warn=False)
    if kind == "variational":
        return lambda p: variational_pressure(kernel, p)[0]
    raise ValueError(f"unknown pressure {kind!r}")


def _resolve(residual, b0):
    """Root of ``residual`` near ``b0``, widening the bracket until it changes sign."""
    width = 1e-6 * max(1.0, abs(b0))
    for _ in range(40):
        try:
            return find_root(residual, b0 - width, b0 + width)
        except (NoRoot, KernelInvalid):
            width *= 4.0
    raise ConstraintLost(f"could not re-solve the field constraint near {b0!r}")


def _derivative(fn, x, h, lower=None):
    # central difference; second-order forward stencil when x - h leaves the domain
    if lower is not None and x - h < lower:
        return (-3 * fn(x) + 4 * fn(x + h) - fn(x + 2 * h)) / (2 * h)
    return (fn(x + h) - fn(x - h)) / (2 * h)


def observables_fd(
    kernel: Kernel,
    params: ModelParams,
    pressure: str = "closed_form",
    constrained: Optional[bool] = None,
    step: float = 1e-4,
    heat_step: float = 1e-3,
) -> Observables:
    """Observables as finite-difference derivatives of a pressure.

    ``M = dphi/dB(+1) + dphi/dB(-1)``, ``U = -dphi/dbeta``,
    ``heat = -beta^2 dU/dbeta`` and ``chi = d2phi/dB(-1)^2 + d2phi/dB(+1)^2``.
    When ``constrained`` (the default whenever the base point satisfies the
    field constraint to 1e-8) every displaced point is moved back onto the
    constraint: displacing beta or ``B(+1)`` re-solves ``B(-1)``, displacing
    ``B(-1)`` re-solves ``B(+1)``.
    """
    phi = _pressure_fn(pressure, kernel)
    beta, bp, bm = params.beta, params.field_plus, params.field_minus
    if constrained is None:
        constrained = abs(energetic_preference_residual(kernel, params)) <= 1e-8

    def minus_for(b, plus):
        return _resolve(lambda x: energetic_preference_residual(kernel, ModelParams(b, plus, x)), bm)

    def plus_for(b, minus):
        return _resolve(lambda x: energetic_preference_residual(kernel, ModelParams(b, x, minus)), bp)

    if constrained:
        def phi_beta(b):
            return phi(ModelParams(b, bp, minus_for(b, bp)))

        def phi_plus(x):
            return phi(ModelParams(beta, x, minus_for(beta, x)))

        def phi_minus(x):
            return phi(ModelParams(beta, plus_for(beta, x), x))
    else:
        def phi_beta(b):
            return phi(ModelParams(b, bp, bm))

        def phi_plus(x):
            return phi(ModelParams(beta, x, bm))

        def phi_minus(x):
            return phi(ModelParams(beta, bp, x))

    def energy(b):
        return -_derivative(phi_beta, b, step, lower=0.0)

    M = _derivative(phi_plus, bp, step) + _derivative(phi_minus, bm, step)
    U = energy(beta)
    heat = -beta * beta * _derivative(energy, beta, heat_step, lower=0.0)
    center_p, center_m = phi_plus(bp), phi_minus(bm)
    chi = (
        (phi_plus(bp + step) - 2 * center_p + phi_plus(bp - step))
        + (phi_minus(bm + step) - 2 * center_m + phi_minus(bm - step))
    ) / (step * step)
    return Observables(M, U, heat, chi, constrained)


def criticality_residual(kernel: Kernel, params: ModelParams) -> float:
    e = effective_kernel(kernel, params)
    return e.c_pm - 0.5 * e.c_pp - 0.5 * e.c_mm


@dataclass(frozen=True)
class FieldPolicy:
    """Fields used along a beta scan; ``b_minus=None`` solves the constraint."""

    b_plus: float = 0.0
    b_minus: Optional[float] = 0.0
    bracket: tuple = (-100.0, 100.0)

    def params(self, kernel: Kernel, beta: float) -> ModelParams:
        if self.b_minus is None:
            return ModelParams(beta, self.b_plus, solve_field(kernel, beta, self.b_plus, self.bracket))
        return ModelParams(beta, self.b_plus, self.b_minus)


def symmetry_breaking_gap(kernel: Kernel, beta: float, policy: FieldPolicy = FieldPolicy()) -> float:
    """``a1 + a2 - a3 - 2``: positive once ``x = 1/2`` stops being a local maximum."""
    params = policy.params(kernel, beta)
    c = variational_coeffs(effective_kernel(kernel, params), beta)
    return c.a1 + c.a2 - c.a3 - 2.0


def critical_beta(kernel: Kernel, field_policy: FieldPolicy = FieldPolicy(), beta_max: float = 10.0, scan_points: int = 2000) -> float:
    """Smallest beta in ``(0, beta_max]`` where the symmetric point loses local maximality."""
    if beta_max <= 0:
        raise ValueError("beta_max must be positive")

    def gap(b):
        return symmetry_breaking_gap(kernel, b, field_policy)

    lo = 0.0
    root = None
    for i in range(1, scan_points + 1):
        b = beta_max * i / scan_points
        if gap(b) >= 0:
            root = find_root(gap, lo, b, tol=0.0) if gap(lo) < 0 else lo
            break
        lo = b
    if root is None:
        raise NoCriticalPoint(f"symmetric phase persists on (0, {beta_max}]")
    probe = root * (1 + 1e-3)
    _, x_star = variational_pressure(kernel, field_policy.params(kernel, probe))
    if abs(x_star - 0.5) <= 1e-6:
        warnings.warn(f"no symmetry breaking detected just above beta={root:.10g}")
    return root


@dataclass(frozen=True)
class ThermoPoint:
    beta: float
    phi: float
    x_star: float
    M: object
    U: float
    heat: float
    chi: float
    constraint_residual: float


def thermo_point(kernel: Kernel, params: ModelParams, observables: str = "fd", pressure: str = "closed_form") -> ThermoPoint:
    """Everything at one parameter point.

    ``observables="fd"`` takes M, U, heat and chi from :func:`observables_fd`
    on the ``pressure`` given; ``"literal"`` uses the closed-form formulas for
    M, U and heat (chi always comes from finite differences).
    """
    phi, x_star = variational_pressure(kernel, params)
    obs = observables_fd(kernel, params, pressure=pressure)
    if observables == "fd":
        M, U, heat = obs.M, obs.U, obs.heat
    elif observables == "literal":
        M = magnetization_paper(kernel, params)
        U = internal_energy_paper(kernel, params)
        heat = specific_heat_paper(kernel, params)
    else:
        raise ValueError(f"unknown observables {observables!r}")
    return ThermoPoint(params.beta, phi, x_star, M, U, heat, obs.chi, energetic_preference_residual(kernel, params))


def sweep(
    kernel: Kernel,
    betas: Sequence[float],
    field_policy: FieldPolicy = FieldPolicy(),
    observables: str = "fd",
    pressure: str = "closed_form",
) -> list[ThermoPoint]:
    return [thermo_point(kernel, field_policy.params(kernel, b), observables, pressure) for b in betas]


SWEEP_COLUMNS = ("beta", "phi", "x_star", "M", "U", "heat", "chi", "constraint_residual")


def _fmt(value) -> str:
    value = float(value)
    return "NaN" if math.isnan(value) else f"{value:.17g}"


def sweep_to_csv(points: Sequence[ThermoPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for p in points:
        writer.writerow([_fmt(getattr(p, c)) for c in SWEEP_COLUMNS])
    return buf.getvalue()
