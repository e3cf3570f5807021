"""Exponent bookkeeping and the odd power map ⟨a⟩ = |a|^(p-1) sgn(a)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PExponent:
    """An exponent p in (1, ∞) together with its derived constants.

    q is the conjugate-style exponent p/(p-1) that drives the supersolution
    root u -> u^(1/q).  Two different constants are both commonly written
    C_p; they are kept apart here:

    * ``root_constant`` = (p/(p-1))^(p-1) = q^(p-1), the factor multiplying
      the potential in the modified operator whose supersolutions admit the
      1/q-th root transform;
    * ``classical_constant`` = ((p-1)/p)^p, the sharp constant of the power
      weight n^(-p) on the half line.
    """

    p: float

    def __post_init__(self):
        if not (self.p > 1.0 and np.isfinite(self.p)):
            raise ValueError(f"p must lie in (1, inf), got {self.p}")

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def root_constant(self) -> float:
        return self.q ** (self.p - 1.0)

    @property
    def classical_constant(self) -> float:
        return ((self.p - 1.0) / self.p) ** self.p


def as_p(p) -> PExponent:
    return p if isinstance(p, PExponent) else PExponent(float(p))


def phi_p(a, p) -> np.ndarray:
    """|a|^(p-1) sgn(a), elementwise; phi_p(0) = 0 for every p > 1."""
    pe = as_p(p)
    a = np.asarray(a, dtype=float)
    out = np.sign(a) * np.abs(a) ** (pe.p - 1.0)
    if a.ndim == 0:
        return float(out)
    return out
