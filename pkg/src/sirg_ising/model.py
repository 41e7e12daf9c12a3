"""Model parameters, connection kernels and the field constraint.

Spins take the two labels -1 and +1. A site with label ``a`` carries the
coordinate ``s(+1) = sqrt(beta) * B(+1)`` or ``s(-1) = -sqrt(beta) * B(-1)``,
and the connection kernel ``C`` is evaluated at pairs of these coordinates.
Because only two labels exist, everything downstream depends on ``C`` through
three numbers ``C(+,+)``, ``C(-,+)`` and ``C(-,-)``, collected in
:class:`EffectiveKernel`.

Arrays indexed by spin always use position 0 for -1 and position 1 for +1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import KernelInvalid, NoRoot

SPINS = (-1, 1)


def spin_index(a: int) -> int:
    return 0 if a < 0 else 1


@dataclass(frozen=True)
class ModelParams:
    """Inverse temperature and the two external fields ``B(+1)``, ``B(-1)``."""

    beta: float
    field_plus: float = 0.0
    field_minus: float = 0.0

    def __post_init__(self):
        for name in ("beta", "field_plus", "field_minus"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta!r}")

    def coordinate(self, a: int) -> float:
        """Spin coordinate ``s(a) = sqrt(beta) * B(a) * a``."""
        root = math.sqrt(self.beta)
        return root * self.field_plus if a > 0 else -root * self.field_minus

    def field(self, a: int) -> float:
        return self.field_plus if a > 0 else self.field_minus

    def with_beta(self, beta: float) -> "ModelParams":
        return ModelParams(beta, self.field_plus, self.field_minus)

    def with_fields(self, field_plus=None, field_minus=None) -> "ModelParams":
        return ModelParams(
            self.beta,
            self.field_plus if field_plus is None else field_plus,
            self.field_minus if field_minus is None else field_minus,
        )


@dataclass(frozen=True)
class EffectiveKernel:
    """Kernel entries at the spin coordinates, with their beta-derivatives."""

    c_pp: float
    c_pm: float
    c_mm: float
    d_pp: float = 0.0
    d_pm: float = 0.0
    d_mm: float = 0.0

    def matrix(self) -> np.ndarray:
        """2x2 array ``C[a, b]`` indexed by spin position (0 -> -1, 1 -> +1)."""
        return np.array([[self.c_mm, self.c_pm], [self.c_pm, self.c_pp]])

    def entry(self, a: int, b: int) -> float:
        if a > 0 and b > 0:
            return self.c_pp
        if a < 0 and b < 0:
            return self.c_mm
        return self.c_pm


class Kernel:
    """Symmetric nonnegative connection kernel.

    Subclasses implement :meth:`eval`. They may override :meth:`entries` when
    the three effective entries are not obtained by evaluating at the spin
    coordinates, and :meth:`entry_derivatives` when an analytic beta-derivative
    is available.
    """

    spec: str = "custom"

    def eval(self, x: float, y: float) -> float:
        raise NotImplementedError

    def entries(self, params: ModelParams) -> tuple[float, float, float]:
        sp, sm = params.coordinate(1), params.coordinate(-1)
        c_pm = self.eval(sm, sp)
        c_mp = self.eval(sp, sm)
        if not math.isclose(c_pm, c_mp, rel_tol=1e-12, abs_tol=1e-300):
            raise KernelInvalid(f"kernel {self.spec} is not symmetric: {c_pm} != {c_mp}")
        return self.eval(sp, sp), c_pm, self.eval(sm, sm)

    def entry_derivatives(self, params: ModelParams) -> Optional[tuple[float, float, float]]:
        return None

    def __repr__(self):
        return f"{type(self).__name__}({self.spec!r})"


class ConstantKernel(Kernel):
    """``C(x, y) = lam``: the Erdos-Renyi case."""

    def __init__(self, lam: float):
        self.lam = float(lam)
        self.spec = f"constant:{self.lam!r}"

    def eval(self, x, y):
        return self.lam

    def entry_derivatives(self, params):
        return 0.0, 0.0, 0.0


class BlockKernel(Kernel):
    """Kernel given directly by its values on spin-label pairs.

    The entries do not depend on the fields or on beta, so ``eval`` takes spin
    labels (-1 or +1) rather than real coordinates.
    """

    def __init__(self, c11: float, c1m1: float, cm1m1: float):
        self.c11, self.c1m1, self.cm1m1 = float(c11), float(c1m1), float(cm1m1)
        self.spec = f"block:{self.c11!r},{self.c1m1!r},{self.cm1m1!r}"

    def eval(self, x, y):
        if x not in SPINS or y not in SPINS:
            raise KernelInvalid("block kernels are evaluated at spin labels -1 or +1")
        if x > 0 and y > 0:
            return self.c11
        if x < 0 and y < 0:
            return self.cm1m1
        return self.c1m1

    def entries(self, params):
        return self.c11, self.c1m1, self.cm1m1

    def entry_derivatives(self, params):
        return 0.0, 0.0, 0.0


class ProductKernel(Kernel):
    """``C(x, y) = c * g(x) * g(y)`` with ``g`` the identity by default.

    Only valid where the product is nonnegative; this is checked when the
    entries are evaluated.
    """

    def __init__(self, c: float, g: Optional[Callable[[float], float]] = None):
        self.c = float(c)
        self.g = g
        self.spec = f"product:{self.c!r}"

    def eval(self, x, y):
        if self.g is None:
            return self.c * x * y
        return self.c * float(self.g(x)) * float(self.g(y))

    def entry_derivatives(self, params):
        if self.g is not None:
            return None
        bp, bm = params.field_plus, params.field_minus
        return self.c * bp * bp, -self.c * bp * bm, self.c * bm * bm


class CustomKernel(Kernel):
    """Wrap an arbitrary function ``fn(x, y)``.

    ``derivatives`` optionally maps params to the analytic beta-derivatives
    of ``(C(+,+), C(-,+), C(-,-))``.
    """

    def __init__(self, fn: Callable[[float, float], float], derivatives=None, name="custom"):
        self.fn = fn
        self.derivatives = derivatives
        self.spec = name

    def eval(self, x, y):
        return float(self.fn(x, y))

    def entry_derivatives(self, params):
        if self.derivatives is None:
            return None
        return tuple(float(v) for v in self.derivatives(params))


def parse_kernel(text: str) -> Kernel:
    """Parse ``constant:lam``, ``block:c11,c1m1,cm1m1`` or ``product:c``."""
    kind, sep, rest = text.strip().partition(":")
    if not sep:
        raise ValueError(f"kernel spec {text!r} lacks a ':'")
    try:
        values = [float(v) for v in rest.split(",")]
    except ValueError:
        raise ValueError(f"kernel spec {text!r} has a non-numeric value") from None
    expected = {"constant": 1, "block": 3, "product": 1}
    if kind not in expected:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if len(values) != expected[kind]:
        raise ValueError(f"{kind} kernel needs {expected[kind]} value(s), got {len(values)}")
    if kind == "constant":
        return ConstantKernel(*values)
    if kind == "block":
        return BlockKernel(*values)
    return ProductKernel(*values)


def _check_entries(values, spec):
    for v in values:
        if not math.isfinite(v) or v < 0:
            raise KernelInvalid(f"kernel {spec} evaluates to {v!r}; entries must be finite and >= 0")


def _fd_derivatives(kernel: Kernel, params: ModelParams):
    beta = params.beta
    h = 1e-6 * max(1.0, beta)
    if beta >= h:
        hi = kernel.entries(params.with_beta(beta + h))
        lo = kernel.entries(params.with_beta(beta - h))
        return tuple((a - b) / (2 * h) for a, b in zip(hi, lo))
    # second-order forward stencil near beta = 0
    f0 = kernel.entries(params)
    f1 = kernel.entries(params.with_beta(beta + h))
    f2 = kernel.entries(params.with_beta(beta + 2 * h))
    return tuple((-3 * a + 4 * b - c) / (2 * h) for a, b, c in zip(f0, f1, f2))


def effective_kernel(kernel: Kernel, params: ModelParams, derivatives: str = "auto") -> EffectiveKernel:
    """Evaluate the three kernel entries and their beta-derivatives.

    ``derivatives`` is ``"auto"`` (analytic when the kernel supplies it,
    finite differences otherwise), ``"fd"`` or ``"analytic"``.
    """
    c = kernel.entries(params)
    _check_entries(c, kernel.spec)
    d = None
    if derivatives in ("auto", "analytic"):
        d = kernel.entry_derivatives(params)
        if d is None and derivatives == "analytic":
            raise ValueError(f"kernel {kernel.spec} has no analytic derivative")
    if d is None:
        d = _fd_derivatives(kernel, params)
    return EffectiveKernel(c[0], c[1], c[2], d[0], d[1], d[2])


def energetic_preference_residual(kernel: Kernel, params: ModelParams) -> float:
    """``(e^beta - 1)(C(-,-) - C(+,+)) - 2(B(-1) + B(+1))``; zero on the constraint."""
    eff = effective_kernel(kernel, params)
    return math.expm1(params.beta) * (eff.c_mm - eff.c_pp) - 2.0 * (
        params.field_minus + params.field_plus
    )


def find_root(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of ``fn`` on ``[lo, hi]`` by bisection, then guarded secant steps."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoRoot(f"no sign change on [{lo}, {hi}] (values {flo:.6g}, {fhi:.6g})")
    width0 = hi - lo
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
        if hi - lo < 1e-6 * width0:
            break
    best, fbest = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    for _ in range(200):
        if abs(fbest) < tol:
            return best
        x = hi - fhi * (hi - lo) / (fhi - flo) if fhi != flo else 0.5 * (lo + hi)
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        fx = fn(x)
        if abs(fx) < abs(fbest):
            best, fbest = x, fx
        if fx == 0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
        # the secant endpoint can stall; a bisection keeps the bracket shrinking
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fmid = fn(mid)
        if abs(fmid) < abs(fbest):
            best, fbest = mid, fmid
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return best


def solve_field(kernel: Kernel, beta: float, field_plus: float, bracket: Sequence[float] = (-10.0, 10.0)) -> float:
    """Value of ``B(-1)`` that satisfies the constraint with ``B(+1)`` held fixed."""
    def residual(b):
        return energetic_preference_residual(kernel, ModelParams(beta, field_plus, b))

    return find_root(residual, float(bracket[0]), float(bracket[1]))


def solve_field_plus(kernel: Kernel, beta: float, field_minus: float, bracket: Sequence[float] = (-10.0, 10.0)) -> float:
    """Mirror of :func:`solve_field`: solve for ``B(+1)`` with ``B(-1)`` fixed."""
    def residual(b):
        return energetic_preference_residual(kernel, ModelParams(beta, b, field_minus))

    return find_root(residual, float(bracket[0]), float(bracket[1]))


def edge_probability(kernel: Kernel, n: int, s_u: float, s_v: float) -> float:
    """Bond probability ``min(C(s_u, s_v) / n, 1)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    c = kernel.eval(s_u, s_v)
    _check_entries((c,), kernel.spec)
    return min(c / n, 1.0)


def pair_probabilities(eff: EffectiveKernel, n: int) -> np.ndarray:
    """2x2 bond-probability table ``p[a, b]`` by spin position."""
    return np.minimum(eff.matrix() / n, 1.0)
