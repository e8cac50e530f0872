"""Domain types, units convention, and flat key=value run configuration.

Natural units hbar = c = 1 with metric signature (-,+,+).  All lengths and
times are expressed in units of the reference bandwidth 1/sigma; the CLI and
presets take k0/sigma, kz/sigma ratios directly.  Every type here is an
immutable value object and safe to share between concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "RHO_FLOOR",
    "RHO_NODE",
    "H_MIN",
    "DEFAULT_OPTICAL_RATIO",
    "Regime",
    "Undefined",
    "is_defined",
    "WavepacketSpec",
    "SpacetimePoint",
    "BoostFrame",
    "GridSpec",
    "FieldSample",
    "ValidationReport",
    "validate_spec",
    "RunConfig",
    "ConfigError",
    "parse_config",
    "serialize_config",
]

# |rho| below this the velocity field is reported undefined rather than huge.
RHO_FLOOR = 1e-12
# Near-node density threshold: the integrator stops growing its step below it.
RHO_NODE = 1e-9
# Integrator step floor; a trajectory whose step collapses below this stalls.
H_MIN = 1e-10
DEFAULT_OPTICAL_RATIO = 5.0


class Regime(Enum):
    """Dispersion regime selecting the wavefunction evaluation path."""

    HEAD_ON = "headon"      # E(k) = |k|, closed forms
    GENERAL = "general"     # E(k) = sqrt(k^2 + kz^2), numeric quadrature
    PARAXIAL = "paraxial"   # E(k) = kz + k^2/(2 kz), closed forms


@dataclass(frozen=True)
class Undefined:
    """Velocity value at a point where it has no finite value.

    ``sign`` carries the sign of the one-sided limit where one exists
    (+1.0 / -1.0), or 0.0 when unknown.
    """

    sign: float = 0.0


def is_defined(value) -> bool:
    """True for finite float velocities, False for Undefined / nan / inf."""
    if isinstance(value, Undefined):
        return False
    try:
        return math.isfinite(value)
    except TypeError:
        return False


@dataclass(frozen=True)
class WavepacketSpec:
    """Physical scenario: two counter-propagating Gaussian envelopes.

    alpha weights the right-mover (amplitude sqrt(alpha)) against the
    left-mover (sqrt(1-alpha)); k0R/k0L are the centre wavenumbers (> 0,
    the left-mover is centred at -k0L), sigmaR/sigmaL the bandwidths, and
    kz the constant transverse wavenumber acting as an effective mass.
    """

    alpha: float
    k0R: float
    k0L: float
    sigmaR: float
    sigmaL: float
    kz: float
    regime: Regime

    @classmethod
    def symmetric(cls, alpha: float, k0: float, sigma: float = 1.0,
                  kz: float = 0.0, regime: Regime = Regime.HEAD_ON) -> "WavepacketSpec":
        return cls(alpha=alpha, k0R=k0, k0L=k0, sigmaR=sigma, sigmaL=sigma,
                   kz=kz, regime=regime)

    @property
    def is_symmetric(self) -> bool:
        return self.k0R == self.k0L and self.sigmaR == self.sigmaL

    def is_optical(self, ratio: float = DEFAULT_OPTICAL_RATIO) -> bool:
        """Envelope centres sit at least ``ratio`` bandwidths away from k=0."""
        return self.k0R >= ratio * self.sigmaR and self.k0L >= ratio * self.sigmaL


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    x: float


@dataclass(frozen=True)
class BoostFrame:
    """Boost with dimensionless velocity v, |v| < 1."""

    v: float

    def __post_init__(self):
        if not (math.isfinite(self.v) and abs(self.v) < 1.0):
            raise ValueError(f"boost velocity must satisfy |v| < 1, got {self.v}")

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.v * self.v)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (t, x) evaluation lattice."""

    t_min: float
    t_max: float
    x_min: float
    x_max: float
    nt: int
    nx: int

    def __post_init__(self):
        if not self.t_max > self.t_min:
            raise ValueError("t_max must exceed t_min")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.nt < 2 or self.nx < 2:
            raise ValueError("nt and nx must be >= 2")

    def ts(self):
        import numpy as np
        return np.linspace(self.t_min, self.t_max, self.nt)

    def xs(self):
        import numpy as np
        return np.linspace(self.x_min, self.x_max, self.nx)


@dataclass(frozen=True)
class FieldSample:
    """Wavefunction and derived fields at one spacetime point.

    psi, dpsi_dx, dpsi_dt are the relativistically normalised wavefunction
    and its true derivatives; j = 2 Im(psi* dpsi_dx) and
    rho = 2 Im(psi* (-dpsi_dt)) hold as stored for the head-on and general
    regimes (for the paraxial regime rho drops the second-spatial-derivative
    correction, so the identity holds to that approximation).  V is j/rho, or
    nan where |rho| <= RHO_FLOOR.
    """

    point: SpacetimePoint
    psi: complex
    dpsi_dx: complex
    dpsi_dt: complex
    j: float
    rho: float
    V: float


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    optical: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_spec(spec: WavepacketSpec,
                  optical_ratio: float = DEFAULT_OPTICAL_RATIO) -> ValidationReport:
    """Report-style validation; never raises.

    Pure: identical inputs always give identical reports.
    """
    bad: list[str] = []
    for name in ("alpha", "k0R", "k0L", "sigmaR", "sigmaL", "kz"):
        if not math.isfinite(getattr(spec, name)):
            bad.append(f"{name} not finite")
    if math.isfinite(spec.alpha) and not (0.0 <= spec.alpha <= 1.0):
        bad.append("alpha out of range [0, 1]")
    for name in ("k0R", "k0L", "sigmaR", "sigmaL"):
        val = getattr(spec, name)
        if math.isfinite(val) and not val > 0.0:
            bad.append(f"{name} must be > 0")
    if math.isfinite(spec.kz) and spec.kz < 0.0:
        bad.append("kz must be >= 0")
    if spec.regime is Regime.HEAD_ON and spec.kz != 0.0:
        bad.append("headon regime requires kz = 0")
    if spec.regime is Regime.PARAXIAL and not spec.kz > 0.0:
        bad.append("paraxial regime requires kz > 0")
    optical = not bad and spec.is_optical(optical_ratio)
    return ValidationReport(violations=tuple(bad), optical=optical)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration: scenario + grid + run parameters."""

    spec: WavepacketSpec
    grid: GridSpec
    boost_v: float = 0.0
    n_traj: int = 20
    seed: int = 0
    abs_tol: float = 1e-8      # trajectory integrator local error budget
    rel_tol: float = 1e-9      # quadrature convergence tolerance (field-scale relative)
    quad_nodes: int = 16       # minimum Gauss-Legendre nodes per panel
    optical_ratio: float = DEFAULT_OPTICAL_RATIO


class ConfigError(ValueError):
    """Config parsing or domain failure; carries line number or key name."""

    def __init__(self, message: str, lineno: int | None = None, key: str | None = None):
        loc = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{loc}{message}")
        self.lineno = lineno
        self.key = key


_FLOAT_KEYS = {
    "alpha", "k0", "k0R", "k0L", "sigma", "sigmaR", "sigmaL", "kz",
    "t_min", "t_max", "x_min", "x_max", "boost_v", "abs_tol", "rel_tol",
    "optical_ratio",
}
_INT_KEYS = {"nt", "nx", "n_traj", "seed", "quad_nodes"}
_ENUM_KEYS = {"regime"}
_ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _ENUM_KEYS

_GRID_DEFAULTS = dict(t_min=-4.0, t_max=4.0, x_min=-8.0, x_max=8.0, nt=201, nx=201)
_RUN_DEFAULTS = dict(boost_v=0.0, n_traj=20, seed=0, abs_tol=1e-8, rel_tol=1e-9,
                     quad_nodes=16, optical_ratio=DEFAULT_OPTICAL_RATIO)


def _domain_check(key: str, value) -> None:
    ok = True
    if key == "alpha":
        ok = 0.0 <= value <= 1.0
    elif key in ("k0", "k0R", "k0L", "sigma", "sigmaR", "sigmaL"):
        ok = value > 0.0
    elif key == "kz":
        ok = value >= 0.0
    elif key == "boost_v":
        ok = abs(value) < 1.0
    elif key in ("nt", "nx"):
        ok = value >= 2
    elif key == "n_traj":
        ok = value >= 1
    elif key in ("abs_tol", "rel_tol", "optical_ratio"):
        ok = value > 0.0
    elif key == "quad_nodes":
        ok = value >= 4
    if key in _FLOAT_KEYS and not math.isfinite(value):
        ok = False
    if not ok:
        raise ConfigError(f"value {value!r} out of domain for key '{key}'", key=key)


def parse_config(text: str) -> RunConfig:
    """Parse a flat ``key=value`` document into a RunConfig.

    ``k0`` sets both centre wavenumbers, ``sigma`` both bandwidths; mixing a
    shorthand with its expanded keys is rejected.  Unknown and duplicate keys
    are parse errors carrying the line number; out-of-domain values are
    domain errors naming the key.  Blank lines and lines starting with '#'
    are ignored.
    """
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key=value, got {stripped!r}", lineno=lineno)
        key, _, value_str = stripped.partition("=")
        key = key.strip()
        value_str = value_str.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown key '{key}'", lineno=lineno, key=key)
        if key in raw:
            raise ConfigError(f"duplicate key '{key}'", lineno=lineno, key=key)
        if key in _ENUM_KEYS:
            try:
                value: object = Regime(value_str.lower())
            except ValueError:
                raise ConfigError(
                    f"regime must be one of headon|general|paraxial, got {value_str!r}",
                    lineno=lineno, key=key) from None
        elif key in _INT_KEYS:
            try:
                value = int(value_str)
            except ValueError:
                raise ConfigError(f"key '{key}' expects an integer, got {value_str!r}",
                                  lineno=lineno, key=key) from None
        else:
            try:
                value = float(value_str)
            except ValueError:
                raise ConfigError(f"key '{key}' expects a number, got {value_str!r}",
                                  lineno=lineno, key=key) from None
        if key not in _ENUM_KEYS:
            _domain_check(key, value)
        raw[key] = value

    for shorthand, expanded in (("k0", ("k0R", "k0L")), ("sigma", ("sigmaR", "sigmaL"))):
        if shorthand in raw and any(k in raw for k in expanded):
            raise ConfigError(
                f"'{shorthand}' conflicts with {expanded[0]}/{expanded[1]}",
                key=shorthand)

    if "alpha" not in raw:
        raise ConfigError("missing required key 'alpha'", key="alpha")
    if "regime" not in raw:
        raise ConfigError("missing required key 'regime'", key="regime")
    if "k0" in raw:
        k0R = k0L = float(raw["k0"])  # type: ignore[arg-type]
    elif "k0R" in raw and "k0L" in raw:
        k0R, k0L = float(raw["k0R"]), float(raw["k0L"])  # type: ignore[arg-type]
    else:
        raise ConfigError("missing required key 'k0' (or both k0R and k0L)", key="k0")
    if "sigma" in raw:
        sigmaR = sigmaL = float(raw["sigma"])  # type: ignore[arg-type]
    else:
        sigmaR = float(raw.get("sigmaR", 1.0))  # type: ignore[arg-type]
        sigmaL = float(raw.get("sigmaL", 1.0))  # type: ignore[arg-type]

    spec = WavepacketSpec(
        alpha=float(raw["alpha"]),  # type: ignore[arg-type]
        k0R=k0R, k0L=k0L, sigmaR=sigmaR, sigmaL=sigmaL,
        kz=float(raw.get("kz", 0.0)),  # type: ignore[arg-type]
        regime=raw["regime"],  # type: ignore[arg-type]
    )
    grid = GridSpec(**{k: raw.get(k, d) for k, d in _GRID_DEFAULTS.items()})  # type: ignore[arg-type]
    run = {k: raw.get(k, d) for k, d in _RUN_DEFAULTS.items()}
    return RunConfig(spec=spec, grid=grid, **run)  # type: ignore[arg-type]


def serialize_config(cfg: RunConfig) -> str:
    """Canonical flat key=value form; parse_config(serialize_config(c)) == c."""
    spec, grid = cfg.spec, cfg.grid
    pairs = [
        ("alpha", spec.alpha), ("k0R", spec.k0R), ("k0L", spec.k0L),
        ("sigmaR", spec.sigmaR), ("sigmaL", spec.sigmaL), ("kz", spec.kz),
        ("regime", spec.regime.value),
        ("t_min", grid.t_min), ("t_max", grid.t_max),
        ("x_min", grid.x_min), ("x_max", grid.x_max),
        ("nt", grid.nt), ("nx", grid.nx),
        ("boost_v", cfg.boost_v), ("n_traj", cfg.n_traj), ("seed", cfg.seed),
        ("abs_tol", cfg.abs_tol), ("rel_tol", cfg.rel_tol),
        ("quad_nodes", cfg.quad_nodes), ("optical_ratio", cfg.optical_ratio),
    ]
    return "\n".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                     for k, v in pairs) + "\n"
