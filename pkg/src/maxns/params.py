"""Physical constants of the linearized system and the scalars derived from them."""

import math
from dataclasses import dataclass, field

from .errors import ValidationError

RAW_FIELDS = ("rho_s", "a", "gamma", "mu", "kappa")


@dataclass(frozen=True)
class PhysicalParams:
    """Reference density, pressure law and Maxwell relaxation constants.

    Derived fields are always recomputed from the raw ones and never accepted
    as input.
    """

    rho_s: float
    a: float
    gamma: float
    mu: float
    kappa: float
    b: float = field(init=False)
    omega0: float = field(init=False)
    c_wave: float = field(init=False)
    T_star: float = field(init=False)

    def __post_init__(self):
        _validate_raw(self.raw())
        b = self.a * self.gamma * self.rho_s ** (self.gamma - 2.0)
        bs2 = b * self.rho_s**2
        omega0 = -bs2 / (self.mu + self.kappa * bs2)
        c_wave = math.sqrt(b * self.rho_s + self.mu / (self.kappa * self.rho_s))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "omega0", omega0)
        object.__setattr__(self, "c_wave", c_wave)
        object.__setattr__(self, "T_star", 4.0 * math.pi / c_wave)

    def raw(self):
        return {name: getattr(self, name) for name in RAW_FIELDS}

    @classmethod
    def from_b(cls, b, rho_s, mu, kappa):
        """Parameters with a prescribed ``b`` (isothermal law, ``gamma = 1``)."""
        return cls(rho_s=rho_s, a=b * rho_s, gamma=1.0, mu=mu, kappa=kappa)

    def omega0_residual(self):
        """Residual of the affine relation fixing ``omega0``."""
        coef = self.b * self.rho_s + self.mu / (self.kappa * self.rho_s)
        return coef * self.omega0 + self.b * self.rho_s / self.kappa


def _validate_raw(raw, prefix=""):
    for name in RAW_FIELDS:
        value = raw[name]
        path = f"{prefix}{name}"
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(path, f"expected a real number, got {value!r}")
        if not math.isfinite(value):
            raise ValidationError(path, "must be finite")
        if value <= 0:
            raise ValidationError(path, "must be strictly positive")
    if raw["gamma"] < 1:
        raise ValidationError(f"{prefix}gamma", "adiabatic exponent must be >= 1")


def derive_constants(raw, prefix=""):
    """Build :class:`PhysicalParams` from a mapping of the five raw constants.

    ``prefix`` is prepended to field names in validation messages, so the CLI
    can report paths like ``params.kappa``.
    """
    missing = [name for name in RAW_FIELDS if name not in raw]
    if missing:
        raise ValidationError(f"{prefix}{missing[0]}", "missing")
    unknown = sorted(set(raw) - set(RAW_FIELDS))
    if unknown:
        raise ValidationError(f"{prefix}{unknown[0]}", "unknown field (derived values are never read)")
    values = {name: raw[name] for name in RAW_FIELDS}
    _validate_raw(values, prefix)
    return PhysicalParams(**{k: float(v) for k, v in values.items()})


#: Unit parameter set used in tests and docs (all constants equal to one).
P_STAR = PhysicalParams(rho_s=1.0, a=1.0, gamma=1.0, mu=1.0, kappa=1.0)
