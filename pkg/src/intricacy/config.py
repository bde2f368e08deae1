"""INI-style experiment configuration.

Every key has a type, a unit and a default; the defaults reproduce the
acceptance runs. Unknown sections or keys are errors.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


def _ini(v) -> str:
    if v is None:
        return ""
    if isinstance(v, tuple):
        return " ".join(str(x) for x in v)
    return str(v)


@dataclass(frozen=True)
class Key:
    default: object
    kind: type
    unit: str
    doc: str


def _optional(kind):
    """Parser for keys where an empty value means "derive it"."""
    return ("optional", kind)


def _box(raw: str) -> tuple[float, float, float]:
    vals = tuple(float(v) for v in raw.split())
    if len(vals) != 3:
        raise ValueError(raw)
    return vals


SCHEMA: dict[str, dict[str, Key]] = {
    "indexed": {
        "n_atoms": Key(2, int, "-", "number of atoms N (2..4)"),
        "grid_points": Key(16, int, "-", "interior grid points per atom"),
        "box_length": Key(10.0, float, "length", "1D box length; walls at 0 and L"),
        "dt": Key(0.002, float, "time", "RK4 step"),
        "t_end": Key(1.0, float, "time", "final time"),
        "samples": Key(11, int, "-", "number of equally spaced output times including 0"),
        "channels": Key(1, int, "-", "number of intricacy channels k"),
        "mass": Key(1.0, float, "mass", "atom mass"),
        "packet_width": Key(0.7, float, "length", "Gaussian width of each atom packet"),
        "packet_momentum": Key(1.5, float, "1/length", "mean momentum of the packets"),
        "initial_string": Key("", str, "-",
                              "digits of the starting index string, e.g. 10; empty = all zero"),
        "potential_strength": Key(1.0, float, "energy", "pair potential depth"),
        "potential_range": Key(1.0, float, "length", "pair potential Gaussian range"),
        "m_present": Key(False, bool, "-", "couple a probe particle M"),
        "m_strength": Key(2.0, float, "energy", "M-atom potential depth"),
        "m_range": Key(0.7, float, "length", "M-atom potential range"),
        "m_center": Key("", _optional(float), "length", "initial M position; empty = 0.15 L"),
        "m_width": Key(0.7, float, "length", "M packet width"),
        "m_momentum": Key(3.0, float, "1/length", "M packet momentum"),
        "m_weights": Key("1", str, "-",
                         "space-separated channel amplitudes of M (normalised, one per channel)"),
    },
    "kmc": {
        "n_particles": Key(100_000, int, "-", "number of hard spheres"),
        "box": Key("8 8 80", _box, "mean free path", "box lengths Lx Ly Lz"),
        "mean_free_path": Key(1.0, float, "length", "target mean free path"),
        "seed": Key(12345, int, "-", "random seed (overridden by --seed)"),
        "contagion": Key(True, bool, "-", "apply the contagion rule at collisions"),
        "mixed_mode": Key("scatter", str, "-",
                          "channel 1 vs 2 collisions: scatter (elastic) or pass (no interaction)"),
        "t_end": Key(30.0, float, "mean free time", "final time"),
        "sample_interval": Key(1.0, float, "mean free time", "spacing of profile samples"),
        "bin_width": Key(0.5, float, "mean free path", "z-bin width of the profiles"),
        "threshold": Key(0.05, float, "-", "f1 level that defines the front"),
        "fit_t_min": Key(5.0, float, "mean free time", "start of the front-speed fit"),
        "source.geometry": Key("plane", str, "-", "plane, line or point"),
        "source.z0": Key("", _optional(float), "mean free path", "source plane; empty = box centre"),
        "source.thickness": Key(1.0, float, "mean free path", "slab thickness"),
        "source2.z0": Key("", _optional(float), "mean free path",
                          "optional channel-2 plane source; empty = none"),
    },
    "pde": {
        "mode": Key("source", str, "-", "source (planar delta) or multichannel (uniform seeds)"),
        "dx": Key(0.1, float, "mean free path", "grid spacing"),
        "dt": Key("", _optional(float), "mean free time", "time step; empty = 1.5 dx^2"),
        "t_end": Key(50.0, float, "mean free time", "final time"),
        "half_width": Key(40.0, float, "mean free path", "domain is [-half_width, half_width]"),
        "sample_interval": Key(1.0, float, "mean free time", "spacing of stored snapshots"),
        "threshold": Key(1e-12, float, "-", "f1 level used for the front summary"),
        "constraint.enabled": Key(True, bool, "-", "clamp f1 outside z0 +- v t"),
        "constraint.speed": Key(3.0 ** -0.5, float, "mean speed", "imposed front speed"),
        "source.amplitude": Key(1.0, float, "-", "f1 on the source node at t = 0+"),
        "source.z0": Key(0.0, float, "mean free path", "source position (a grid node)"),
        "seed.f1": Key(0.03, float, "-", "multichannel mode: uniform initial f1"),
        "seed.f2": Key(0.07, float, "-", "multichannel mode: uniform initial f2"),
    },
    "front": {
        "C": Key(0.05, float, "-", "tail amplitude at the start point"),
        "x0": Key("", _optional(float), "mean free path",
                  "start depth; empty = depth where C exp(-q x0) = 1e-4"),
        "dx": Key(0.01, float, "mean free path", "output sample spacing"),
    },
    "census": {
        "n_e": Key(2.7e25, float, "1/m^3", "environment number density"),
        "v_e": Key(380.0, float, "m/s", "environment mean molecular speed"),
        "v_prime": Key(220.0, float, "m/s", "front speed inside the box"),
        "L": Key(0.1, float, "m", "box length scale"),
        "lambda_mfp": Key(7e-8, float, "m", "mean free path inside the box"),
    },
}


def _convert(section, key, spec: Key, raw: str):
    kind = spec.kind
    try:
        if isinstance(kind, tuple):
            return None if raw.strip() == "" else kind[1](raw)
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {spec.unit} value") from None


def defaults() -> dict[str, dict[str, object]]:
    out = {}
    for sec, keys in SCHEMA.items():
        out[sec] = {k: (_convert(sec, k, s, s.default) if isinstance(s.default, str) else s.default)
                    for k, s in keys.items()}
    return out


@dataclass
class ExperimentConfig:
    values: dict[str, dict[str, object]] = field(default_factory=defaults)
    source: str = "<defaults>"

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    def echo(self) -> str:
        """Resolved configuration in the same INI syntax."""
        lines = []
        for sec, vals in self.values.items():
            lines.append(f"[{sec}]")
            for k, v in vals.items():
                lines.append(f"{k} = {_ini(v)}")
            lines.append("")
        return "\n".join(lines)


def parse(text: str, source: str = "<string>") -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    cfg = ExperimentConfig(source=source)
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}] in {source}")
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}] of {source}")
            cfg.values[sec][key] = _convert(sec, key, SCHEMA[sec][key], raw)
    return cfg


def load(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc}") from None
    return parse(text, str(p))


def documentation() -> str:
    """Commented INI listing every key with its unit and default."""
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for k, s in keys.items():
            lines.append(f"# {s.doc} ({s.unit})")
            lines.append(f"{k} = {s.default}")
        lines.append("")
    return "\n".join(lines)
