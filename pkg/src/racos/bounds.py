"""Closed-form sufficient-condition calculators for experiment design.

Each function evaluates one published bound exactly as a pure function of the
problem constants; nothing here gates the runtime algorithms.  Unspecified
absolute constants (c_p, c_k, c_gamma2) default to 1 and can be overridden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInput, require
from .sampling import jl_tail_constant


@dataclass(frozen=True)
class TheoryInputs:
    n1: int | None = None
    n2: int | None = None
    n_l: int | None = None
    r: int | None = None
    mu_u: float | None = None
    mu_v: float | None = None
    mu_l: float | None = None
    kappa: float | None = None
    delta: float | None = None
    p: float | None = None
    gamma: float | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    tau1: float | None = None
    eta_n: float | None = None
    sigma: float | None = None
    phi: float | None = None
    beta: float | None = None
    c_p: float = 1.0
    c_k: float = 1.0
    c_gamma2: float = 1.0

    def resolved_mu_l(self) -> float:
        if self.mu_l is not None:
            return self.mu_l
        if self.mu_u is not None and self.mu_v is not None:
            return max(self.mu_u, self.mu_v)
        raise InvalidInput("mu_l requires either mu_l or both mu_u and mu_v")


def _need(inputs: TheoryInputs, *names: str) -> list[float]:
    vals = []
    for name in names:
        v = getattr(inputs, name)
        if v is None:
            raise InvalidInput(f"calculator needs '{name}'")
        vals.append(v)
    return vals


def k_upper_noisy(inputs: TheoryInputs) -> float:
    n2, r, mu_v = _need(inputs, "n2", "r", "mu_v")
    return n2 / (3.0 * (1.0 + 1024.0 * r * mu_v))


def gamma_lower_noisy(inputs: TheoryInputs) -> float:
    n2, n_l, r, mu_v, delta = _need(inputs, "n2", "n_l", "r", "mu_v", "delta")
    require(0 < delta < 1, "delta must be in (0, 1)")
    return max(
        200.0 * math.log(6.0 / delta) / n_l,
        600.0 * (1.0 + 1024.0 * r * mu_v) * math.log(6.0 / delta) / n2,
        10.0 * r * mu_v * math.log(6.0 * r / delta) / n_l,
    )


def m_lower(inputs: TheoryInputs) -> float:
    n2, r, delta = _need(inputs, "n2", "r", "delta")
    return (5.0 * (r + 1.0) + math.log(2.0 * n2) + math.log(2.0 / delta)) / jl_tail_constant(0.25)


def q_lower(inputs: TheoryInputs) -> float:
    n2, delta = _need(inputs, "n2", "delta")
    return 4.0 * math.log(2.0 * n2 / delta) / jl_tail_constant(0.25)


def tau2_lower(inputs: TheoryInputs) -> float:
    tau1, beta, gamma, kappa, n2 = _need(inputs, "tau1", "beta", "gamma", "kappa", "n2")
    require(0 < tau1 < 1, "tau1 must be in (0, 1)")
    return (
        6.0 * (beta + 1.0) * (tau1 / 4.0 + 1.0) + 90.0 * math.sqrt(6.0 * gamma) * beta * kappa * n2
    ) / tau1


def sigma_r_lower(inputs: TheoryInputs) -> float:
    tau1, gamma, n2, eta_n = _need(inputs, "tau1", "gamma", "n2", "eta_n")
    return 90.0 * math.sqrt(2.0 * gamma) / tau1 * n2 * eta_n


def alpha_window_generic(inputs: TheoryInputs) -> tuple[float, float]:
    gamma, n2, eta_n = _need(inputs, "gamma", "n2", "eta_n")
    return 18.0 * gamma * n2 * eta_n, 54.0 * gamma * n2 * eta_n


def _gaussian_eta_constants(n1: float, n2: float, delta: float) -> tuple[float, float]:
    s = math.sqrt(8.0 * n1 * math.log(2.0 * n2 / delta))
    require(n1 > s, "window needs n1 > sqrt(8*n1*log(2*n2/delta))")
    return math.sqrt(n1 - s), math.sqrt(n1 + s)


def alpha_window_gaussian(
    inputs: TheoryInputs | None = None,
    *,
    n1: int | None = None,
    n2: int | None = None,
    gamma: float | None = None,
    sigma: float | None = None,
    delta: float | None = None,
) -> tuple[float, float]:
    if inputs is None:
        inputs = TheoryInputs(n1=n1, n2=n2, gamma=gamma, sigma=sigma, delta=delta)
    n1_, n2_, gamma_, sigma_, delta_ = _need(inputs, "n1", "n2", "gamma", "sigma", "delta")
    c1, c2 = _gaussian_eta_constants(n1_, n2_, delta_)
    return 18.0 * c1 * gamma_ * sigma_ * n2_, 54.0 * c2 * gamma_ * sigma_ * n2_


def p_lower_untrimmed(inputs: TheoryInputs) -> float:
    n1, n_l, r = _need(inputs, "n1", "n_l", "r")
    mu_l = inputs.resolved_mu_l()
    return inputs.c_p * mu_l**2 * r**2 * math.log(4.0 * n_l) ** 3 / n1


def k_upper_untrimmed(inputs: TheoryInputs) -> float:
    n1, n2, n_l, r, p = _need(inputs, "n1", "n2", "n_l", "r", "p")
    mu_l = inputs.resolved_mu_l()
    bulk = (
        inputs.c_k
        * (1.0 + 3.0 * math.sqrt(6.0) * mu_l * r / (p * math.sqrt(n1)))
        * mu_l**3
        * r**3
        * math.log(4.0 * n_l) ** 6
    )
    return (p**2 * n2 / 3.0) / (p**2 + bulk)


def gamma1_lower(inputs: TheoryInputs) -> float:
    n1, n_l, r, mu_u, p, delta = _need(inputs, "n1", "n_l", "r", "mu_u", "p", "delta")
    return max(
        2.0 * r * mu_u * math.log(2.0 * r) / (n1 * p),
        8.0 * math.log(4.0 * n_l / delta) / (n1 * p),
        10.0 * r * mu_u * math.log(4.0 * r / delta) / n1,
        162.0 * p_lower_untrimmed(inputs) / p,
    )


def gamma2_lower(inputs: TheoryInputs) -> float:
    n2, n_l, r, mu_v, delta = _need(inputs, "n2", "n_l", "r", "mu_v", "delta")
    return max(
        200.0 * math.log(9.0 / delta) / n_l,
        10.0 * r * mu_v * math.log(9.0 * r / delta) / n_l,
        inputs.c_gamma2 * (1.0 / delta) ** 0.2 / n2,
        200.0 * math.log(9.0 / delta) / k_upper_untrimmed(inputs),
    )


def p_lower_trimmed(inputs: TheoryInputs) -> float:
    n1, n2, r, phi = _need(inputs, "n1", "n2", "r", "phi")
    mu_l = inputs.resolved_mu_l()
    return inputs.c_p * (1.0 + 1.0 / phi) * mu_l * r * math.log(2.0 * n2) ** 2 / n1


def k_upper_trimmed(inputs: TheoryInputs) -> float:
    n2, n_l, r, p, phi = _need(inputs, "n2", "n_l", "r", "p", "phi")
    mu_l = inputs.resolved_mu_l()
    return (
        inputs.c_k
        * phi
        / (1.0 + phi * math.sqrt(phi))
        * p
        * n_l
        / (mu_l**1.5 * r**1.5 * math.log(2.0 * n2) ** 3)
    )


_CALCULATORS = {
    "k_upper_noisy": k_upper_noisy,
    "gamma_lower_noisy": gamma_lower_noisy,
    "m_lower": m_lower,
    "q_lower": q_lower,
    "tau2_lower": tau2_lower,
    "sigma_r_lower": sigma_r_lower,
    "alpha_window_generic": alpha_window_generic,
    "alpha_window_gaussian": alpha_window_gaussian,
    "p_lower_untrimmed": p_lower_untrimmed,
    "k_upper_untrimmed": k_upper_untrimmed,
    "gamma1_lower": gamma1_lower,
    "gamma2_lower": gamma2_lower,
    "p_lower_trimmed": p_lower_trimmed,
    "k_upper_trimmed": k_upper_trimmed,
}


def all_bounds(inputs: TheoryInputs) -> dict:
    """Evaluate every calculator the given inputs support; omissions become None."""
    out: dict[str, object] = {}
    for name, fn in _CALCULATORS.items():
        try:
            val = fn(inputs)
        except InvalidInput:
            out[name] = None
            continue
        out[name] = list(val) if isinstance(val, tuple) else val
    return out
