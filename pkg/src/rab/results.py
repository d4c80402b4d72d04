"""Result record returned by every bound evaluation."""

import math
from dataclasses import dataclass, field

from rab.specfun import EnergyPerBit

KINDS = (
    "csir-ach",
    "csir-conv",
    "nocsi-ach",
    "nocsi-conv",
    "nocsi-ach-known-activity",
    "tdma",
)


@dataclass
class BoundResult:
    """Energy-per-bit from one bound plus the optimiser witnesses.

    ``witnesses`` may hold ``theta``, ``psi``, ``nu`` and ``p_tot`` (the total
    active power P_tot,a at the optimum); absent keys mean the bound has no
    such variable. ``diagnostics`` is free-form and ends up in the JSON
    sidecar.
    """

    kind: str
    eb: EnergyPerBit
    witnesses: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown bound kind {self.kind!r}")

    @property
    def feasible(self):
        return self.eb.feasible

    @classmethod
    def from_log_power(cls, kind, ln_p_tot, S, witnesses=None, diagnostics=None):
        """Build from ln P_tot,a; energy-per-bit is P_tot,a / S."""
        witnesses = dict(witnesses or {})
        if math.isfinite(ln_p_tot):
            eb = EnergyPerBit(ln_p_tot - math.log(S))
            try:
                witnesses["p_tot"] = math.exp(ln_p_tot)
            except OverflowError:
                witnesses["p_tot"] = math.inf
        else:
            eb = EnergyPerBit.infeasible()
            witnesses.pop("p_tot", None)
        return cls(kind, eb, witnesses, dict(diagnostics or {}))
