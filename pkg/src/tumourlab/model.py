"""Pressure-dependent growth terms F1, F2, G1, G2 and derived quantities.

Each term is one of three parametric shapes::

    affine(a, b)            a * (1 - p/b)
    affine_truncated(a, b)  a * max(1 - p/b, 0)
    zero                    0

F1 and G2 are the self-renewal rates of species 1 and 2; G1 and F2 are the
cross-reaction rates (species 2 feeding species 1 and vice versa).  The
combined rates are F = F1 + F2 and G = G1 + G2.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DomainError, InfeasibleModelError

KINDS = ("zero", "affine", "affine_truncated")
KIND_CODES = {name: code for code, name in enumerate(KINDS)}
SLOTS = ("F1", "F2", "G1", "G2")

# number of interior scan points used for R_inf
_SCAN_POINTS = 10_000


def _check_pressure(p):
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("pressure must be nonnegative")
    return arr


@dataclass(frozen=True)
class GrowthTerm:
    kind: str = "zero"
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown growth kind {self.kind!r}")
        if self.kind != "zero":
            if not self.a >= 0:
                raise ValueError(f"amplitude must be >= 0, got {self.a}")
            if not self.b > 0:
                raise ValueError(f"threshold must be > 0, got {self.b}")

    @classmethod
    def parse(cls, text: str) -> "GrowthTerm":
        """Parse ``zero``, ``affine(a, b)`` or ``affine_truncated(a, b)``."""
        s = text.strip()
        if s == "zero":
            return cls()
        m = re.fullmatch(r"(affine|affine_truncated)\s*\(([^()]*)\)", s)
        if not m:
            raise ConfigError(f"cannot parse growth term {text!r}")
        args = [x.strip() for x in m.group(2).split(",")]
        if len(args) != 2:
            raise ConfigError(f"{m.group(1)} takes two arguments (a, b), got {text!r}")
        try:
            a, b = (float(x) for x in args)
        except ValueError:
            raise ConfigError(f"non-numeric argument in {text!r}") from None
        try:
            return cls(m.group(1), a, b)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def __str__(self):
        if self.kind == "zero":
            return "zero"
        return f"{self.kind}({self.a!r}, {self.b!r})"

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.a == 0.0

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]

    def value(self, p):
        p = np.asarray(p, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(p)[()]
        lin = 1.0 - p / self.b
        if self.kind == "affine_truncated":
            lin = np.maximum(lin, 0.0)
        return (self.a * lin)[()]

    def derivative(self, p):
        """Derivative in p; at the truncation kink the value from below."""
        p = np.asarray(p, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(p)[()]
        slope = np.full_like(p, -self.a / self.b)
        if self.kind == "affine_truncated":
            slope = np.where(p > self.b, 0.0, slope)
        return slope[()]

    def antiderivative(self, p):
        """Integral of the term from 0 to p."""
        p = np.asarray(p, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(p)[()]
        q = p
        if self.kind == "affine_truncated":
            q = np.minimum(p, self.b)
        return (self.a * (q - q * q / (2.0 * self.b)))[()]


class Rates(NamedTuple):
    F1: object
    F2: object
    G1: object
    G2: object
    F: object
    G: object


def homeostatic_pressure(F1: GrowthTerm, F2: GrowthTerm, G1: GrowthTerm, G2: GrowthTerm) -> float:
    """Smallest p beyond which F1, G2 <= 0 and F2 = G1 = 0.

    Plain affine cross terms with positive amplitude never vanish on a
    half-line, so they make the model infeasible.
    """
    thresholds = [0.0]
    for name, term in (("F1", F1), ("G2", G2)):
        if not term.is_zero:
            thresholds.append(term.b)
    for name, term in (("F2", F2), ("G1", G1)):
        if term.is_zero:
            continue
        if term.kind == "affine":
            raise InfeasibleModelError(
                f"cross term {name} = {term} never vanishes identically; "
                "use affine_truncated or zero"
            )
        thresholds.append(term.b)
    return float(max(thresholds))


@dataclass(frozen=True)
class ConditionVerdict:
    name: str
    passed: bool
    severity: str  # "ok", "warning" or "error"
    detail: str


@dataclass(frozen=True)
class FeasibilityReport:
    verdicts: tuple

    @property
    def errors(self):
        return [v for v in self.verdicts if v.severity == "error"]

    @property
    def warnings(self):
        return [v for v in self.verdicts if v.severity == "warning"]

    @property
    def feasible(self) -> bool:
        return not self.errors

    def lines(self):
        for v in self.verdicts:
            flag = "PASS" if v.passed else v.severity.upper()
            yield f"{v.name}: {flag} ({v.detail})"


@dataclass(frozen=True)
class GrowthModel:
    F1: GrowthTerm = field(default_factory=GrowthTerm)
    F2: GrowthTerm = field(default_factory=GrowthTerm)
    G1: GrowthTerm = field(default_factory=GrowthTerm)
    G2: GrowthTerm = field(default_factory=GrowthTerm)

    @classmethod
    def from_specs(cls, **specs: str) -> "GrowthModel":
        unknown = set(specs) - set(SLOTS)
        if unknown:
            raise ConfigError(f"unknown growth slots {sorted(unknown)}")
        return cls(**{k: GrowthTerm.parse(v) for k, v in specs.items()})

    @classmethod
    def tumour_host(cls) -> "GrowthModel":
        """Tumour/host model with carrying capacity K = 3 and truncated cross terms."""
        return cls(
            F1=GrowthTerm("affine", 1.0, 3.0),
            F2=GrowthTerm("affine_truncated", 1.0, 1.0),
            G1=GrowthTerm("affine_truncated", 1.0, 1.0),
            G2=GrowthTerm("affine", 1.0, 1.0),
        )

    @classmethod
    def two_clones(cls) -> "GrowthModel":
        """No cross reactions; F1 = 2(1 - p), G2 = 1 - p."""
        return cls(F1=GrowthTerm("affine", 2.0, 1.0), G2=GrowthTerm("affine", 1.0, 1.0))

    @property
    def terms(self):
        return (self.F1, self.F2, self.G1, self.G2)

    @property
    def has_cross_terms(self) -> bool:
        return not (self.F2.is_zero and self.G1.is_zero)

    @cached_property
    def P_H(self) -> float:
        return homeostatic_pressure(self.F1, self.F2, self.G1, self.G2)

    @cached_property
    def R_inf(self) -> float:
        """Bound for |F| and |G| on [0, P_H] from a dense scan plus endpoints."""
        p = np.linspace(0.0, self.P_H, _SCAN_POINTS + 1)
        r = eval_rates(self, p)
        return float(max(np.max(np.abs(r.F)), np.max(np.abs(r.G))))

    def kernel_params(self):
        """(codes, amplitudes, thresholds) arrays in slot order F1, F2, G1, G2."""
        codes = np.array([t.code for t in self.terms], dtype=np.int64)
        amps = np.array([t.a for t in self.terms], dtype=float)
        thrs = np.array([t.b for t in self.terms], dtype=float)
        return codes, amps, thrs

    def describe(self) -> dict:
        return {slot: str(term) for slot, term in zip(SLOTS, self.terms)}


def eval_rates(model: GrowthModel, p) -> Rates:
    p = _check_pressure(p)
    F1, F2, G1, G2 = (t.value(p) for t in model.terms)
    return Rates(F1, F2, G1, G2, F1 + F2, G1 + G2)


def eval_rate_derivatives(model: GrowthModel, p) -> Rates:
    p = _check_pressure(p)
    dF1, dF2, dG1, dG2 = (t.derivative(p) for t in model.terms)
    return Rates(dF1, dF2, dG1, dG2, dF1 + dF2, dG1 + dG2)


def antiderivatives(model: GrowthModel, p):
    """(H1, H2) with H1 the integral of F and H2 the integral of G from 0 to p."""
    p = _check_pressure(p)
    F1, F2, G1, G2 = (t.antiderivative(p) for t in model.terms)
    return F1 + F2, G1 + G2


def check_feasibility(model: GrowthModel) -> FeasibilityReport:
    verdicts = []

    # the parametric family has bounded slopes; truncated terms are only
    # Lipschitz (kink at p = b), which is accepted
    kinks = [f"{s} at p={t.b:g}" for s, t in zip(SLOTS, model.terms)
             if t.kind == "affine_truncated" and not t.is_zero]
    detail = "bounded slopes" + (f"; kinks: {', '.join(kinks)}" if kinks else "")
    verdicts.append(ConditionVerdict("bounded_c1", True, "ok", detail))

    problems = []
    for slot in ("F1", "G2"):
        t = getattr(model, slot)
        if t.is_zero:
            problems.append(f"{slot} is constant")
        elif t.kind == "affine_truncated":
            problems.append(f"{slot} is flat for p > {t.b:g}")
    if problems:
        verdicts.append(ConditionVerdict(
            "monotonicity", False, "error", "not strictly decreasing: " + "; ".join(problems)))
    else:
        verdicts.append(ConditionVerdict(
            "monotonicity", True, "ok", "F1, G2 strictly decreasing; F2, G1 non-increasing"))

    try:
        P_H = model.P_H
    except InfeasibleModelError as exc:
        verdicts.append(ConditionVerdict("homeostatic_pressure", False, "error", str(exc)))
    else:
        if P_H > 0:
            verdicts.append(ConditionVerdict("homeostatic_pressure", True, "ok", f"P_H = {P_H:g}"))
        else:
            verdicts.append(ConditionVerdict(
                "homeostatic_pressure", False, "error", "no positive P_H (all terms zero)"))

    # a mismatch F(0) != G(0) is only a warning
    r0 = eval_rates(model, 0.0)
    F0, G0 = float(r0.F), float(r0.G)
    if F0 == G0:
        verdicts.append(ConditionVerdict("equal_rates_at_zero", True, "ok", f"F(0) = G(0) = {F0:g}"))
    else:
        verdicts.append(ConditionVerdict(
            "equal_rates_at_zero", False, "warning", f"F(0) = {F0:g}, G(0) = {G0:g}"))
    return FeasibilityReport(tuple(verdicts))
