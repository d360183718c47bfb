"""Run configuration: a single JSON document whose defaults reproduce the
published experiment settings (dt = 0.1, delta grid, 40/30/30 shot split)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict


class ConfigError(ValueError):
    """Invalid configuration; commands exit with code 2."""


@dataclass
class InitialStateSpec:
    kind: str = "dressed"  # dressed | pinwheel | sector
    sz: int = 0
    cz_bonds: list | None = None  # None = all free outer bonds


@dataclass
class ShotSpec:
    total: int = 1000
    fractions: tuple[float, float, float] = (0.4, 0.3, 0.3)
    twirl_fraction: float = 0.5


@dataclass
class NoiseConfig:
    p_pauli: float = 0.0
    enable_postselect: bool = False
    enable_twirl: bool = False
    twirl_angle: float | None = None  # None = pi/2


@dataclass
class MagnetSpec:
    solver: str = "uvqpe"
    delta: float | None = None  # None = per-lattice default
    n_steps: int | None = None
    dt: float | None = None


@dataclass
class AllocationSpec:
    m_totals: tuple[int, ...] = (100, 1000, 10000)
    f1_grid: tuple[float, ...] = (0.1, 0.2, 0.3, 1.0 / 3.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
    n_times: int = 10
    realizations: int = 100


@dataclass
class RunConfig:
    n_triangles: int = 4
    h_field: float = 0.0
    dt: float = 0.1
    steps: int = 60
    solvers: tuple[str, ...] = ("uvqpe", "odmd")
    deltas: tuple[float, ...] = (1e-1, 1e-3, 1e-5)
    evolver: str = "exact"  # exact | trotter | floquet
    initial: InitialStateSpec = field(default_factory=InitialStateSpec)
    shots: ShotSpec | None = None  # None = exact expectation values
    noise: NoiseConfig | None = None
    realizations: int = 1
    magnitude_source: str = "f1_sqrt"
    eigenvalue_band: tuple[float, float] = (0.5, 1.5)
    odmd_window: int | None = None
    odmd_real_part: bool = False
    reverse_trotter_groups: bool = False
    seed: int = 0
    magnet: MagnetSpec = field(default_factory=MagnetSpec)
    allocation: AllocationSpec = field(default_factory=AllocationSpec)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as f:
            raw = json.load(f)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "initial" in kwargs and kwargs["initial"] is not None:
            kwargs["initial"] = InitialStateSpec(**kwargs["initial"])
        if kwargs.get("shots") is not None:
            spec = dict(kwargs["shots"])
            if "fractions" in spec:
                spec["fractions"] = tuple(spec["fractions"])
            kwargs["shots"] = ShotSpec(**spec)
        if kwargs.get("noise") is not None:
            kwargs["noise"] = NoiseConfig(**kwargs["noise"])
        if "magnet" in kwargs and kwargs["magnet"] is not None:
            kwargs["magnet"] = MagnetSpec(**kwargs["magnet"])
        if "allocation" in kwargs and kwargs["allocation"] is not None:
            spec = dict(kwargs["allocation"])
            for key in ("m_totals", "f1_grid"):
                if key in spec:
                    spec[key] = tuple(spec[key])
            kwargs["allocation"] = AllocationSpec(**spec)
        for key in ("solvers", "deltas", "eigenvalue_band"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    def validate(self) -> None:
        if self.n_triangles < 4 or self.n_triangles % 2:
            raise ConfigError("n_triangles must be an even integer >= 4")
        if self.dt <= 0 or self.steps < 1:
            raise ConfigError("dt must be positive and steps >= 1")
        if self.evolver not in ("exact", "trotter", "floquet"):
            raise ConfigError(f"unknown evolver {self.evolver!r}")
        for s in self.solvers:
            if s not in ("uvqpe", "odmd", "uvqpe_floquet"):
                raise ConfigError(f"unknown solver {s!r}")
        if self.initial.kind not in ("dressed", "pinwheel", "sector"):
            raise ConfigError(f"unknown initial state kind {self.initial.kind!r}")
        if self.magnitude_source not in ("f1_sqrt", "eq19"):
            raise ConfigError("magnitude_source must be 'f1_sqrt' or 'eq19'")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        lo, hi = self.eigenvalue_band
        if not 0 < lo < 1 < hi:
            raise ConfigError("eigenvalue_band must bracket the unit circle")
