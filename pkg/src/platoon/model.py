"""Surfer/breaker domain model, dataset loading and synthetic instances."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import npy
from ._rng import stream
from .errors import ConfigError, DomainError, ShapeError

CLASS_DIFF_LIMIT = 4
_INTEGRAL_TOL = 1e-9


@dataclass(frozen=True)
class Surfer:
    class_id: int
    pref_velocity: float
    departure: float
    dt_flex: float
    dv_flex: float

    def __post_init__(self):
        if self.class_id < 0:
            raise DomainError(f"surfer class must be >= 0, got {self.class_id}")
        if not self.pref_velocity > 0:
            raise DomainError(f"surfer velocity must be > 0, got {self.pref_velocity}")
        if self.dt_flex < 0 or self.dv_flex < 0:
            raise DomainError("flexibility windows must be non-negative")


@dataclass(frozen=True)
class Breaker:
    class_id: int
    velocity: float
    departure: float

    def __post_init__(self):
        if self.class_id < 0:
            raise DomainError(f"breaker class must be >= 0, got {self.class_id}")
        if not self.velocity > 0:
            raise DomainError(f"breaker velocity must be > 0, got {self.velocity}")


@dataclass(frozen=True)
class Instance:
    surfers: tuple[Surfer, ...]
    breakers: tuple[Breaker, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "surfers", tuple(self.surfers))
        object.__setattr__(self, "breakers", tuple(self.breakers))
        if len(self.surfers) != len(self.breakers):
            raise ShapeError(
                f"need as many surfers as breakers, got {len(self.surfers)} and {len(self.breakers)}"
            )
        if not self.surfers:
            raise ShapeError("an instance needs at least one surfer/breaker pair")
        diff = self.breaker_classes[None, :] - self.surfer_classes[:, None]
        if np.abs(diff).max() > CLASS_DIFF_LIMIT:
            s, b = np.unravel_index(np.abs(diff).argmax(), diff.shape)
            raise DomainError(
                f"class difference {diff[s, b]} for surfer {s}, breaker {b} is outside [-4, 4]"
            )

    @property
    def n(self) -> int:
        return len(self.surfers)

    @property
    def surfer_classes(self) -> np.ndarray:
        return np.array([s.class_id for s in self.surfers], dtype=np.int64)

    @property
    def breaker_classes(self) -> np.ndarray:
        return np.array([b.class_id for b in self.breakers], dtype=np.int64)

    def surfer_array(self) -> np.ndarray:
        """Rows of (class, velocity, departure, dv_flex, dt_flex)."""
        return np.array(
            [[s.class_id, s.pref_velocity, s.departure, s.dv_flex, s.dt_flex] for s in self.surfers],
            dtype=float,
        )

    def breaker_array(self) -> np.ndarray:
        """Rows of (class, velocity, departure)."""
        return np.array(
            [[b.class_id, b.velocity, b.departure] for b in self.breakers], dtype=float
        )


@dataclass(frozen=True)
class ColumnMap:
    """Column indices of each field inside the dataset arrays."""

    breaker_class: int = 0
    breaker_velocity: int = 1
    breaker_departure: int = 2
    surfer_class: int = 0
    surfer_velocity: int = 1
    surfer_departure: int = 2
    surfer_dv_flex: int = 3
    surfer_dt_flex: int = 4
    # set when the shipped arrays store one vehicle per column instead of per row
    transposed: bool = False

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ColumnMap":
        unknown = set(mapping) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown column map keys: {sorted(unknown)}")
        return cls(**mapping)


DEFAULT_COLUMNS = ColumnMap()


def _as_class(value: float, what: str) -> int:
    rounded = round(float(value))
    if abs(value - rounded) > _INTEGRAL_TOL:
        raise DomainError(f"{what} class {value!r} is not integral")
    return int(rounded)


def _column(arr: np.ndarray, col: int, what: str) -> np.ndarray:
    if col >= arr.shape[1]:
        raise ShapeError(f"{what} array has {arr.shape[1]} columns, column {col} requested")
    return arr[:, col].astype(float)


def instance_from_arrays(
    breakers: np.ndarray,
    surfers: np.ndarray,
    columns: ColumnMap = DEFAULT_COLUMNS,
    label: str = "",
) -> Instance:
    if columns.transposed:
        breakers, surfers = breakers.T, surfers.T
    if breakers.shape[0] != surfers.shape[0]:
        raise ShapeError(f"{breakers.shape[0]} breakers but {surfers.shape[0]} surfers")
    bc = _column(breakers, columns.breaker_class, "breaker")
    bv = _column(breakers, columns.breaker_velocity, "breaker")
    bt = _column(breakers, columns.breaker_departure, "breaker")
    sc = _column(surfers, columns.surfer_class, "surfer")
    sv = _column(surfers, columns.surfer_velocity, "surfer")
    st = _column(surfers, columns.surfer_departure, "surfer")
    sdv = _column(surfers, columns.surfer_dv_flex, "surfer")
    sdt = _column(surfers, columns.surfer_dt_flex, "surfer")
    return Instance(
        surfers=tuple(
            Surfer(_as_class(sc[i], "surfer"), sv[i], st[i], sdt[i], sdv[i]) for i in range(len(sc))
        ),
        breakers=tuple(Breaker(_as_class(bc[i], "breaker"), bv[i], bt[i]) for i in range(len(bc))),
        label=label,
    )


def load_instance(
    breaker_path: str | Path, surfer_path: str | Path, columns: ColumnMap = DEFAULT_COLUMNS
) -> Instance:
    breaker_path = Path(breaker_path)
    label = re.sub(r"-breakers$", "", breaker_path.stem)
    return instance_from_arrays(
        npy.read_npy(breaker_path), npy.read_npy(surfer_path), columns, label=label
    )


_PAIR_RE = re.compile(r"^(\d+)-vehicles-breakers\.npy$")


def find_instance_files(path: str | Path) -> tuple[Path, Path]:
    """Resolve a dataset reference to its (breakers, surfers) file pair.

    Accepted forms: a directory holding exactly one ``<n>-vehicles-*.npy``
    pair, or ``<dir>/<n>`` naming the pair for size ``n`` inside ``<dir>``.
    """
    path = Path(path)
    if path.is_dir():
        matches = sorted(p for p in path.iterdir() if _PAIR_RE.match(p.name))
        if len(matches) != 1:
            raise ShapeError(
                f"{path} holds {len(matches)} instances; name one as {path}/<n>"
            )
        breakers = matches[0]
    elif path.name.isdigit() and path.parent.is_dir():
        breakers = path.parent / f"{int(path.name)}-vehicles-breakers.npy"
    else:
        raise FileNotFoundError(f"no instance at {path}")
    surfers = breakers.with_name(breakers.name.replace("-breakers", "-surfers"))
    for p in (breakers, surfers):
        if not p.is_file():
            raise FileNotFoundError(f"missing instance file {p}")
    return breakers, surfers


def load_instance_ref(path: str | Path, columns: ColumnMap = DEFAULT_COLUMNS) -> Instance:
    return load_instance(*find_instance_files(path), columns=columns)


def list_dataset(directory: str | Path) -> list[int]:
    """Instance sizes present in a dataset directory, ascending."""
    sizes = []
    for p in Path(directory).iterdir():
        m = _PAIR_RE.match(p.name)
        if m:
            sizes.append(int(m.group(1)))
    return sorted(sizes)


def write_instance(instance: Instance, out_dir: str | Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    breakers = out_dir / f"{instance.n}-vehicles-breakers.npy"
    surfers = out_dir / f"{instance.n}-vehicles-surfers.npy"
    npy.write_npy(breakers, instance.breaker_array())
    npy.write_npy(surfers, instance.surfer_array())
    return breakers, surfers


@dataclass(frozen=True)
class GeneratorRanges:
    surfer_classes: tuple[int, int] = (1, 5)
    breaker_classes: tuple[int, int] = (1, 5)
    velocity: tuple[float, float] = (25.0, 40.0)
    departure: tuple[float, float] = (0.0, 60.0)
    dt_flex: tuple[float, float] = (0.0, 10.0)
    dv_flex: tuple[float, float] = (0.0, 6.0)

    def validate(self) -> None:
        for name in self.__dataclass_fields__:
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigError(f"range {name} has lower bound above upper bound")
        if self.surfer_classes[0] < 0 or self.breaker_classes[0] < 0:
            raise ConfigError("classes must be non-negative")
        if self.velocity[0] <= 0:
            raise ConfigError("velocities must be positive")
        if self.dt_flex[0] < 0 or self.dv_flex[0] < 0:
            raise ConfigError("flexibility windows must be non-negative")
        widest = max(
            self.breaker_classes[1] - self.surfer_classes[0],
            self.surfer_classes[1] - self.breaker_classes[0],
        )
        if widest > CLASS_DIFF_LIMIT:
            raise ConfigError(
                f"class ranges allow a difference of {widest}, the model accepts at most 4"
            )


def generate_instance(n: int, seed: int, ranges: GeneratorRanges = GeneratorRanges()) -> Instance:
    """Draw a random instance; a pure function of ``(n, seed, ranges)``."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    ranges.validate()
    rng = stream(seed)

    def uniform(bounds):
        return rng.uniform(bounds[0], bounds[1], size=n)

    sc = rng.integers(ranges.surfer_classes[0], ranges.surfer_classes[1], size=n, endpoint=True)
    sv, st, sdt, sdv = (uniform(r) for r in (ranges.velocity, ranges.departure, ranges.dt_flex, ranges.dv_flex))
    bc = rng.integers(ranges.breaker_classes[0], ranges.breaker_classes[1], size=n, endpoint=True)
    bv, bt = uniform(ranges.velocity), uniform(ranges.departure)
    return Instance(
        surfers=tuple(
            Surfer(int(sc[i]), float(sv[i]), float(st[i]), float(sdt[i]), float(sdv[i]))
            for i in range(n)
        ),
        breakers=tuple(Breaker(int(bc[i]), float(bv[i]), float(bt[i])) for i in range(n)),
        label=f"gen-n{n}-s{seed}",
    )
