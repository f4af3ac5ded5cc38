"""Per-round parameters of the margin-based learner and shipped calibration profiles."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

__all__ = ["AblSchedule", "load_profile"]

PROFILE_FILE = "abl_profiles.json"


@dataclass(frozen=True)
class AblSchedule:
    """Geometric schedule: band widths and radii shrink by ``M`` each round.

    Round ``k`` (1-based) uses band ``b_{k-1}`` for the working set it
    cleans, radius ``r_k`` around the previous iterate, hinge scale
    ``tau_k = tau_factor * min(1, b_{k-1})`` and variance bound
    ``sigma_k^2 = sigma_factor * min(1, b_{k-1}^2/3 + r_k^2)``, where
    ``b_0 = inf`` (the first working set is not band-restricted).
    """

    rounds: int
    M: float = 2.0
    b0: float = 1.0
    r0: float = 1.0
    tau_factor: float = 0.5
    sigma_factor: float = 1.5
    xi: float = 0.1
    n_first: int = 2000
    n_band: int = 1000
    kappa: float = 0.05
    C0: float = 1.5
    hinge_iters: int = 1500
    outlier_tol: float = 0.05
    w0: tuple | None = None
    profile: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("at least one round is required")
        for name in ("M", "b0", "r0", "tau_factor", "sigma_factor", "xi", "kappa", "C0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.n_first < 1 or self.n_band < 1:
            raise ValueError("sample sizes must be positive")

    @staticmethod
    def rounds_for(epsilon: float) -> int:
        return max(1, math.ceil(math.log2(1.0 / epsilon)))

    def band(self, k: int) -> float:
        """``b_k``; ``b_0`` is infinite."""
        return math.inf if k == 0 else self.b0 * self.M ** (-k)

    def radius(self, k: int) -> float:
        return self.r0 * self.M ** (-(k - 1))

    def tau(self, k: int) -> float:
        return self.tau_factor * min(1.0, self.band(k - 1))

    def sigma2(self, k: int) -> float:
        b = self.band(k - 1)
        spread = 1.0 if math.isinf(b) else b * b / 3.0
        return self.sigma_factor * min(1.0, spread + self.radius(k) ** 2)

    def sample_size(self, k: int) -> int:
        return self.n_first if k == 1 else self.n_band

    @property
    def C1(self) -> float:
        """Angle-per-unit-error constant under a Gaussian marginal (error = angle/pi)."""
        return math.pi * self.C0

    def to_dict(self) -> dict:
        out = asdict(self)
        out["w0"] = None if self.w0 is None else list(self.w0)
        return out

    @classmethod
    def from_dict(cls, desc: dict) -> "AblSchedule":
        desc = dict(desc)
        if desc.get("w0") is not None:
            desc["w0"] = tuple(float(v) for v in desc["w0"])
        unknown = set(desc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown schedule keys: {sorted(unknown)}")
        return cls(**desc)

    def with_(self, **kw) -> "AblSchedule":
        return replace(self, **kw)


def _profiles() -> dict:
    text = resources.files("rrl.profiles").joinpath(PROFILE_FILE).read_text()
    return json.loads(text)


def load_profile(d: int, epsilon: float | None = None, name: str | None = None) -> AblSchedule:
    """Shipped calibration for dimension ``d`` (nearest calibrated dimension at or below)."""
    data = _profiles()
    table = data["profiles"]
    if name is None:
        dims = sorted(int(k) for k in table)
        usable = [k for k in dims if k <= d] or dims[:1]
        name = str(usable[-1])
    params = dict(table[name])
    if epsilon is not None:
        params["rounds"] = AblSchedule.rounds_for(epsilon)
    params["profile"] = f"v{data['version']}:{name}"
    return AblSchedule.from_dict(params)
