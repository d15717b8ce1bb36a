from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .util import sha256_json

POTENTIAL_KINDS = ("square_well", "gaussian", "tabulated")


@dataclass
class PotentialConfig:
    kind: str = "square_well"
    depth: float = 1.0
    range: float = 1.0
    cutoff_radius: float | None = None
    table: Path | None = None
    units: str = "dimensionless"
    table_tolerance: float = 1e-8


@dataclass
class ChannelConfig:
    l_max: int = 12
    born_tail: bool = True


@dataclass
class GridConfig:
    lambda_min: float = 1e-5
    lambda_max: float = 1e4
    count: int = 2048
    spacing: str = "log"
    relative: bool = True
    max_points: int = 16384
    check_convergence: bool = False


@dataclass
class EngineConfig:
    r0_fraction: float = 1e-6
    phase_step: float = 0.02
    step_tolerance: float = 1e-9
    max_halvings: int = 6


@dataclass
class ToleranceConfig:
    tau_res: float = 1e-6
    residual: float = 0.02
    corollary: float = 0.05
    ssf_infinity: float = 0.01
    grid_convergence: float = 1e-6
    vertex: float = 1e-6
    unitarity: float = 1e-8


@dataclass
class HexagonConfig:
    s_samples: int = 512
    xi_samples: int = 16
    orientation: int = -1


@dataclass
class ResonanceConfig:
    q1: list[complex] | None = None
    q2: list[complex] | None = None
    p_dim: int | None = None


@dataclass
class SweepConfig:
    depth_min: float | None = None
    depth_max: float | None = None
    points: int = 50


@dataclass
class OutputConfig:
    directory: Path = Path("levlab-out")
    csv: bool = True
    json: bool = True
    plotdata: bool = True


@dataclass
class RunOptions:
    workers: int = 1
    seed: int = 0
    verify_oracle: bool = True


@dataclass
class RunConfig:
    config_path: Path | None
    name: str = "levlab-run"
    potential: PotentialConfig = field(default_factory=PotentialConfig)
    channels: ChannelConfig = field(default_factory=ChannelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    hexagon: HexagonConfig = field(default_factory=HexagonConfig)
    resonance: ResonanceConfig = field(default_factory=ResonanceConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    run: RunOptions = field(default_factory=RunOptions)


def _load_raw(path: Path) -> dict[str, Any]:
    if path.suffix == ".toml":
        return tomllib.loads(path.read_text(encoding="utf-8"))
    if path.suffix == ".json":
        return json.loads(path.read_text(encoding="utf-8"))
    if path.suffix in {".yaml", ".yml"}:
        try:
            import yaml  # type: ignore
        except Exception as exc:  # pragma: no cover
            raise RuntimeError(
                "YAML config requested but PyYAML is not installed. Use TOML/JSON or install pyyaml."
            ) from exc
        with path.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
            if not isinstance(data, dict):
                raise ValueError("Configuration root must be a mapping")
            return data
    raise ValueError(f"Unsupported config extension: {path.suffix}")


def _resolve_path(base: Path, value: str | None) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    if p.is_absolute():
        return p
    return (base / p).resolve()


def _section(raw: dict[str, Any], name: str) -> dict[str, Any]:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ValueError(f"[{name}] must be a table/object")
    return value


def _positive(section: str, key: str, value: float) -> float:
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"[{section}].{key} must be positive, got {value}")
    return value


def _complex_vector(section: str, key: str, value: Any) -> list[complex] | None:
    if value is None:
        return None
    if not isinstance(value, list) or not value:
        raise ValueError(f"[{section}].{key} must be a non-empty list")
    out: list[complex] = []
    for idx, item in enumerate(value):
        if isinstance(item, (int, float)):
            out.append(complex(float(item), 0.0))
        elif isinstance(item, list) and len(item) == 2:
            out.append(complex(float(item[0]), float(item[1])))
        else:
            raise ValueError(f"[{section}].{key}[{idx}] must be a number or a [re, im] pair")
    return out


def build_config(raw: dict[str, Any], base: Path, config_path: Path | None = None) -> RunConfig:
    project_raw = _section(raw, "project")

    pot_raw = _section(raw, "potential")
    kind = str(pot_raw.get("kind", "square_well")).lower().strip()
    if kind not in POTENTIAL_KINDS:
        raise ValueError(f"[potential].kind must be one of {', '.join(POTENTIAL_KINDS)}, got {kind!r}")
    potential = PotentialConfig(
        kind=kind,
        depth=float(pot_raw.get("depth", 1.0)),
        range=float(pot_raw.get("range", 1.0)),
        cutoff_radius=float(pot_raw["cutoff_radius"]) if pot_raw.get("cutoff_radius") is not None else None,
        table=_resolve_path(base, pot_raw.get("table")),
        units=str(pot_raw.get("units", "dimensionless")),
        table_tolerance=float(pot_raw.get("table_tolerance", 1e-8)),
    )
    if not math.isfinite(potential.depth):
        raise ValueError("[potential].depth must be finite")
    if kind != "tabulated":
        _positive("potential", "range", potential.range)
    elif potential.table is None:
        raise ValueError("[potential].table is required for kind=tabulated")
    if potential.cutoff_radius is not None:
        _positive("potential", "cutoff_radius", potential.cutoff_radius)
    _positive("potential", "table_tolerance", potential.table_tolerance)

    ch_raw = _section(raw, "channels")
    channels = ChannelConfig(
        l_max=int(ch_raw.get("l_max", 12)),
        born_tail=bool(ch_raw.get("born_tail", True)),
    )
    if channels.l_max < 1:
        raise ValueError("[channels].l_max must be >= 1")

    grid_raw = _section(raw, "grid")
    grid = GridConfig(
        lambda_min=float(grid_raw.get("lambda_min", 1e-5)),
        lambda_max=float(grid_raw.get("lambda_max", 1e4)),
        count=int(grid_raw.get("count", 2048)),
        spacing=str(grid_raw.get("spacing", "log")),
        relative=bool(grid_raw.get("relative", True)),
        max_points=int(grid_raw.get("max_points", 16384)),
        check_convergence=bool(grid_raw.get("check_convergence", False)),
    )
    _positive("grid", "lambda_min", grid.lambda_min)
    if grid.lambda_max <= grid.lambda_min:
        raise ValueError("[grid].lambda_max must exceed [grid].lambda_min")
    if grid.count < 64:
        raise ValueError(f"[grid].count must be >= 64, got {grid.count}")
    if grid.spacing != "log":
        raise ValueError("[grid].spacing only supports 'log'")
    if grid.max_points < grid.count:
        raise ValueError("[grid].max_points must be >= [grid].count")

    eng_raw = _section(raw, "engine")
    engine = EngineConfig(
        r0_fraction=float(eng_raw.get("r0_fraction", 1e-6)),
        phase_step=float(eng_raw.get("phase_step", 0.02)),
        step_tolerance=float(eng_raw.get("step_tolerance", 1e-9)),
        max_halvings=int(eng_raw.get("max_halvings", 6)),
    )
    for key in ("r0_fraction", "phase_step", "step_tolerance"):
        _positive("engine", key, getattr(engine, key))
    if engine.r0_fraction >= 1.0:
        raise ValueError("[engine].r0_fraction must be < 1")

    tol_raw = _section(raw, "tolerances")
    tolerances = ToleranceConfig(
        **{key: float(tol_raw.get(key, default)) for key, default in asdict(ToleranceConfig()).items()}
    )
    for key, value in asdict(tolerances).items():
        _positive("tolerances", key, value)

    hex_raw = _section(raw, "hexagon")
    hexagon = HexagonConfig(
        s_samples=int(hex_raw.get("s_samples", 512)),
        xi_samples=int(hex_raw.get("xi_samples", 16)),
        orientation=int(hex_raw.get("orientation", -1)),
    )
    if hexagon.orientation not in (-1, 1):
        raise ValueError("[hexagon].orientation must be -1 or 1")
    if hexagon.s_samples < 8 or hexagon.xi_samples < 2:
        raise ValueError("[hexagon].s_samples must be >= 8 and xi_samples >= 2")

    res_raw = _section(raw, "resonance")
    resonance = ResonanceConfig(
        q1=_complex_vector("resonance", "q1", res_raw.get("q1")),
        q2=_complex_vector("resonance", "q2", res_raw.get("q2")),
        p_dim=int(res_raw["p_dim"]) if res_raw.get("p_dim") is not None else None,
    )
    if (resonance.q1 is None) != (resonance.q2 is None):
        raise ValueError("[resonance].q1 and [resonance].q2 must be given together")
    if resonance.q1 is not None and resonance.q2 is not None and len(resonance.q1) != len(resonance.q2):
        raise ValueError("[resonance].q1 and [resonance].q2 must have the same length")
    if resonance.p_dim is not None and resonance.p_dim not in (0, 1, 2):
        raise ValueError("[resonance].p_dim must be 0, 1 or 2")

    sweep_raw = _section(raw, "sweep")
    sweep = SweepConfig(
        depth_min=float(sweep_raw["depth_min"]) if sweep_raw.get("depth_min") is not None else None,
        depth_max=float(sweep_raw["depth_max"]) if sweep_raw.get("depth_max") is not None else None,
        points=int(sweep_raw.get("points", 50)),
    )
    if sweep.points < 2:
        raise ValueError("[sweep].points must be >= 2")

    out_raw = _section(raw, "output")
    output = OutputConfig(
        directory=_resolve_path(base, out_raw.get("directory")) or (base / "levlab-out").resolve(),
        csv=bool(out_raw.get("csv", True)),
        json=bool(out_raw.get("json", True)),
        plotdata=bool(out_raw.get("plotdata", True)),
    )

    run_raw = _section(raw, "run")
    run = RunOptions(
        workers=int(run_raw.get("workers", 1)),
        seed=int(run_raw.get("seed", 0)),
        verify_oracle=bool(run_raw.get("verify_oracle", True)),
    )
    if run.workers < 1:
        raise ValueError("[run].workers must be >= 1")

    return RunConfig(
        config_path=config_path,
        name=str(project_raw.get("name", "levlab-run")),
        potential=potential,
        channels=channels,
        grid=grid,
        engine=engine,
        tolerances=tolerances,
        hexagon=hexagon,
        resonance=resonance,
        sweep=sweep,
        output=output,
        run=run,
    )


def load_config(path: str | Path) -> RunConfig:
    cfg_path = Path(path).resolve()
    raw = _load_raw(cfg_path)
    return build_config(raw, base=cfg_path.parent, config_path=cfg_path)


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    data = asdict(cfg)
    data.pop("config_path", None)
    data["output"].pop("directory", None)
    return data


def config_digest(cfg: RunConfig) -> str:
    """sha256 of the resolved configuration, independent of where outputs are written."""
    return sha256_json(config_to_dict(cfg))
