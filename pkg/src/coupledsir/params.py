"""Infection/recovery rate bundle shared by the dynamics and spectral modules."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

__all__ = ["EpidemicParams"]


@dataclass(frozen=True)
class EpidemicParams:
    """Per-contact infection rates beta_mn, common recovery rate mu, and the
    coupling constant alpha.

    beta_mn is the rate at which a susceptible node of layer m receives the
    infection from an infected neighbor of layer n. Both layers recover at
    the same rate mu. The four rates may optionally be tied together by
    beta11 * beta22 = alpha^2 * beta12 * beta21; see `balanced` and
    `is_balanced`.
    """

    beta11: float
    beta12: float
    beta21: float
    beta22: float
    mu: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("beta11", "beta12", "beta21", "beta22"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")
        if self.mu <= 0:
            raise ParameterError("recovery rate mu must be positive")
        if self.alpha <= 0:
            raise ParameterError("coupling constant alpha must be positive")

    @classmethod
    def balanced(cls, beta11: float, beta22: float, mu: float = 1.0, alpha: float = 1.0) -> "EpidemicParams":
        """Build params with equal inter-layer rates beta12 = beta21 =
        sqrt(beta11*beta22)/alpha, which satisfies the rate constraint exactly."""
        if beta11 < 0 or beta22 < 0:
            raise ParameterError("intra-layer rates must be non-negative")
        cross = math.sqrt(beta11 * beta22) / alpha
        return cls(beta11=beta11, beta12=cross, beta21=cross, beta22=beta22, mu=mu, alpha=alpha)

    def is_balanced(self, rel_tol: float = 1e-12) -> bool:
        """Whether beta11*beta22 = alpha^2*beta12*beta21 within rel_tol."""
        lhs = self.beta11 * self.beta22
        rhs = self.alpha**2 * self.beta12 * self.beta21
        return math.isclose(lhs, rhs, rel_tol=rel_tol, abs_tol=0.0) or lhs == rhs == 0.0

    def require_balanced(self, rel_tol: float = 1e-12) -> None:
        if not self.is_balanced(rel_tol):
            raise ParameterError(
                "rates violate beta11*beta22 = alpha^2*beta12*beta21: "
                f"{self.beta11 * self.beta22:.6g} vs "
                f"{self.alpha**2 * self.beta12 * self.beta21:.6g}"
            )

    def taus(self) -> tuple[float, float, float, float]:
        """Normalized infection strengths (tau11, tau12, tau21, tau22) = beta/mu."""
        return (
            self.beta11 / self.mu,
            self.beta12 / self.mu,
            self.beta21 / self.mu,
            self.beta22 / self.mu,
        )
