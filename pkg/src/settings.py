"""Experiment configuration files.

An experiment is described by one YAML (or JSON) file with nested
sections:

- domain: obstacle/enclosing/truncation radii, node counts, spacing
- coefficients: family name and parameters
- boundary: inner data and the outer closing condition
- solver: Krylov tolerance and iteration cap
- verification: level family and check tolerances
- analysis: exponents p and q, decay fit window
- sweep: lists of p, grid scales and truncation radii to cross

Missing keys take the defaults below. CLI flags (--out, --grid-scale)
override file values. Every block is validated on load; violations raise
ConfigurationError naming the dotted field.
"""
import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

# Try to import yaml, fall back to None if not installed
try:
    import yaml
    YAML_AVAILABLE = True
except ImportError:
    yaml = None
    YAML_AVAILABLE = False

from src.coefficients.families import builtin_family
from src.config import DEFAULT_CONFIG_NAMES, OUTPUT_DIR
from src.errors import ConfigurationError
from src.grid.domain import DomainSpec


def _number(value: Any, name: str, integer: bool = False) -> Union[int, float]:
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        value = math.inf
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"expected a number, got {value!r}", field=name)
    if integer:
        if not number.is_integer():
            raise ConfigurationError(f"expected an integer, got {value!r}", field=name)
        return int(number)
    return number


def _number_list(value: Any, name: str, integer: bool = False) -> List[Union[int, float]]:
    if value is None:
        return []
    if not isinstance(value, (list, tuple)):
        value = [value]
    return [_number(v, f"{name}[{k}]", integer) for k, v in enumerate(value)]


@dataclass
class DomainBlock:
    """Truncated exterior domain and grid resolution."""
    obstacle_radius: float = 1.0
    enclosing_radius: float = 2.0
    truncation_radius: float = 32.0
    n_radial: int = 64
    n_angular: int = 128
    radial_spacing: str = "log"

    def to_spec(self, grid_scale: float = 1.0) -> DomainSpec:
        """Domain spec with node counts refined by grid_scale."""
        spec = DomainSpec(
            obstacle_radius=self.obstacle_radius,
            enclosing_radius=self.enclosing_radius,
            truncation_radius=self.truncation_radius,
            n_radial=self.n_radial,
            n_angular=self.n_angular,
            radial_spacing=self.radial_spacing,
        )
        return spec if grid_scale == 1 else spec.refined(grid_scale)


@dataclass
class CoefficientBlock:
    """Named coefficient family with parameters."""
    family: str = "remark_optimal"
    params: Dict[str, float] = field(default_factory=dict)


@dataclass
class BoundaryBlock:
    """Dirichlet data.

    Attributes:
        inner: Constant or per-angular-node values on the obstacle
        outer: dirichlet_zero, dirichlet_matched or dirichlet_values
        decay_exponent: alpha for dirichlet_matched; defaults to 2/p
        outer_values: Constant or per-node outer values for dirichlet_values
    """
    inner: Union[float, List[float]] = 1.0
    outer: str = "dirichlet_matched"
    decay_exponent: Optional[float] = None
    outer_values: Optional[Union[float, List[float]]] = None


@dataclass
class SolverBlock:
    tol: float = 1e-10
    max_iter: int = 5000


@dataclass
class VerificationBlock:
    """Level family and check tolerances.

    Attributes:
        n_levels: Geometric levels sampled in the level family
        grad_floor: Absolute regular-value floor; None uses the fraction
        grad_floor_fraction: Floor as a fraction of max |grad u|
        n_tau: tau samples in [t/2, t] for the coarea and mean-value checks
        identity_tol: Tolerance of the cut-off identity
        coarea_tol: Tolerance of the coarea comparisons
        growth_tol: Growth that makes a level sequence unbounded
        check_levels: Levels t for the per-level checks; empty picks three
        rho: Cut-off scale; None picks sqrt(g(t) R_out / 2)
        n_samples: Quasi-random samples for the assumption checks
        c4_increment_tol: Cauchy ratio of the C4 check
    """
    n_levels: int = 16
    grad_floor: Optional[float] = None
    grad_floor_fraction: float = 1e-3
    n_tau: int = 17
    identity_tol: float = 5e-2
    coarea_tol: float = 2e-2
    growth_tol: float = 5e-2
    check_levels: List[float] = field(default_factory=list)
    rho: Optional[float] = None
    n_samples: int = 256
    c4_increment_tol: float = 1e-2


@dataclass
class AnalysisBlock:
    """Decay exponent and Lorentz norms.

    Attributes:
        p: Integrability exponent of the decay rate |x|^(-2/p)
        q: Fine exponents of the Lorentz norms (inf allowed)
        window: Fit window as fractions of R_out
        trend_radii: Radii for the truncated-norm trend; empty doubles from 8
    """
    p: float = 2.0
    q: List[float] = field(default_factory=lambda: [2.0, math.inf])
    window: List[float] = field(default_factory=lambda: [0.125, 0.75])
    trend_radii: List[float] = field(default_factory=list)


@dataclass
class SweepBlock:
    """Lists crossed into independent runs; empty lists do not vary."""
    p: List[float] = field(default_factory=list)
    grid_scale: List[float] = field(default_factory=list)
    truncation_radius: List[float] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not (self.p or self.grid_scale or self.truncation_radius)


BLOCKS = {
    "domain": DomainBlock,
    "coefficients": CoefficientBlock,
    "boundary": BoundaryBlock,
    "solver": SolverBlock,
    "verification": VerificationBlock,
    "analysis": AnalysisBlock,
    "sweep": SweepBlock,
}
TOP_LEVEL = set(BLOCKS) | {"output_dir", "seed", "grid_scale"}
# Keys that take either a constant or one value per angular node
NODE_VALUE_KEYS = ("inner", "outer_values")


@dataclass
class ExperimentConfig:
    """One experiment.

    Attributes:
        domain, coefficients, boundary, solver, verification, analysis, sweep: Blocks
        output_dir: Run directory
        seed: Seed for quasi-random sampling
        grid_scale: Refinement multiplier applied to the node counts
        source_files: Files this config was loaded from
    """
    domain: DomainBlock = field(default_factory=DomainBlock)
    coefficients: CoefficientBlock = field(default_factory=CoefficientBlock)
    boundary: BoundaryBlock = field(default_factory=BoundaryBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    verification: VerificationBlock = field(default_factory=VerificationBlock)
    analysis: AnalysisBlock = field(default_factory=AnalysisBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output_dir: str = str(OUTPUT_DIR / "default")
    seed: int = 0
    grid_scale: float = 1.0
    source_files: List[str] = field(default_factory=list)

    @property
    def p(self) -> float:
        """Exponent p, taken from the family when it defines one."""
        return float(self.coefficients.params.get("p", self.analysis.p))

    def domain_spec(self) -> DomainSpec:
        return self.domain.to_spec(self.grid_scale)

    def to_dict(self) -> Dict[str, Any]:
        """Canonical dictionary (no provenance fields)."""
        data = asdict(self)
        data.pop("source_files")
        data["analysis"]["q"] = ["inf" if math.isinf(q) else q for q in self.analysis.q]
        return data

    def config_hash(self) -> str:
        """SHA256 of the canonical JSON form."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def with_overrides(self, **changes: Any) -> "ExperimentConfig":
        """Copy with top-level fields replaced (None values ignored)."""
        return replace(copy.deepcopy(self), **{k: v for k, v in changes.items() if v is not None})

    def validate(self) -> "ExperimentConfig":
        """Check every block; raises ConfigurationError naming the field."""
        self.domain_spec()
        builtin_family(self.coefficients.family, self.coefficients.params)

        b = self.boundary
        inner = b.inner if isinstance(b.inner, list) else [b.inner]
        if any(v < 0 for v in inner):
            raise ConfigurationError("inner values must be non-negative", field="boundary.inner")
        if b.outer not in ("dirichlet_zero", "dirichlet_matched", "dirichlet_values"):
            raise ConfigurationError(
                f"unknown outer condition '{b.outer}'", field="boundary.outer"
            )
        if b.outer == "dirichlet_values" and b.outer_values is None:
            raise ConfigurationError("dirichlet_values needs outer_values", field="boundary.outer_values")

        if not self.solver.tol > 0:
            raise ConfigurationError("must be positive", field="solver.tol")
        if self.solver.max_iter < 1:
            raise ConfigurationError("must be at least 1", field="solver.max_iter")

        v = self.verification
        if v.n_levels < 2:
            raise ConfigurationError("need at least 2 levels", field="verification.n_levels")
        if v.n_tau < 2:
            raise ConfigurationError("need at least 2 tau samples", field="verification.n_tau")
        for name in ("identity_tol", "coarea_tol", "growth_tol", "grad_floor_fraction", "c4_increment_tol"):
            if not getattr(v, name) > 0:
                raise ConfigurationError("must be positive", field=f"verification.{name}")
        if v.rho is not None and not v.rho > 0:
            raise ConfigurationError("must be positive", field="verification.rho")
        if any(t <= 0 for t in v.check_levels):
            raise ConfigurationError("levels must be positive", field="verification.check_levels")

        a = self.analysis
        if not (1.0 <= a.p < math.inf):
            raise ConfigurationError(f"must lie in [1, inf), got {a.p}", field="analysis.p")
        if any(q < 1 for q in a.q):
            raise ConfigurationError("every q must be >= 1", field="analysis.q")
        if len(a.window) != 2 or not 0 < a.window[0] < a.window[1] <= 1:
            raise ConfigurationError(
                f"need [lo, hi] with 0 < lo < hi <= 1, got {a.window}", field="analysis.window"
            )
        if any(p < 1 for p in self.sweep.p):
            raise ConfigurationError("every p must be >= 1", field="sweep.p")
        if any(s <= 0 for s in self.sweep.grid_scale):
            raise ConfigurationError("grid scales must be positive", field="sweep.grid_scale")
        if not self.grid_scale > 0:
            raise ConfigurationError("must be positive", field="grid_scale")
        return self


def _build_block(cls, name: str, data: Any):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigurationError(f"expected a section of key: value pairs, got {data!r}", field=name)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigurationError(f"unknown key '{unknown[0]}'", field=f"{name}.{unknown[0]}")

    values = {}
    defaults = cls()
    for key, raw in data.items():
        dotted = f"{name}.{key}"
        default = getattr(defaults, key)
        if raw is None:
            values[key] = None
        elif key in NODE_VALUE_KEYS and isinstance(raw, (list, tuple)):
            values[key] = _number_list(raw, dotted)
        elif key == "params":
            if not isinstance(raw, dict):
                raise ConfigurationError("expected key: value pairs", field=dotted)
            values[key] = {str(k): _number(v, f"{dotted}.{k}") for k, v in raw.items()}
        elif isinstance(default, bool):
            values[key] = bool(raw)
        elif isinstance(default, int) and not isinstance(default, bool):
            values[key] = _number(raw, dotted, integer=True)
        elif isinstance(default, float):
            values[key] = _number(raw, dotted)
        elif isinstance(default, list):
            values[key] = _number_list(raw, dotted)
        elif isinstance(default, str):
            values[key] = str(raw)
        else:
            values[key] = _number(raw, dotted)
    return replace(defaults, **values)


def config_from_dict(data: Dict[str, Any], source_files: Optional[List[str]] = None) -> ExperimentConfig:
    """Build and validate a config from nested dictionaries.

    Raises:
        ConfigurationError: Unknown sections or keys, wrong types, or
            values outside their ranges
    """
    data = data or {}
    unknown = sorted(set(data) - TOP_LEVEL)
    if unknown:
        raise ConfigurationError(f"unknown section '{unknown[0]}'", field=unknown[0])
    blocks = {name: _build_block(cls, name, data.get(name)) for name, cls in BLOCKS.items()}
    config = ExperimentConfig(
        **blocks,
        output_dir=str(data.get("output_dir", ExperimentConfig.output_dir)),
        seed=_number(data.get("seed", 0), "seed", integer=True),
        grid_scale=_number(data.get("grid_scale", 1.0), "grid_scale"),
        source_files=list(source_files or []),
    )
    return config.validate()


def load_yaml_file(path: Path) -> Dict[str, Any]:
    """Load a YAML configuration file.

    Args:
        path: Path to the YAML file

    Returns:
        Dictionary of configuration values

    Raises:
        ConfigurationError: If the file cannot be parsed
    """
    if not YAML_AVAILABLE:
        raise ConfigurationError("pyyaml is not installed; use a JSON config", field=str(path))
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"invalid YAML: {e}", field=str(path))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigurationError("top level must be a mapping", field=str(path))
    return data


def load_json_file(path: Path) -> Dict[str, Any]:
    """Load a JSON configuration file.

    Args:
        path: Path to the JSON file

    Returns:
        Dictionary of configuration values

    Raises:
        ConfigurationError: If the file cannot be parsed
    """
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON: {e}", field=str(path))
    if not isinstance(data, dict):
        raise ConfigurationError("top level must be an object", field=str(path))
    return data


def load_config_file(path: Path) -> Dict[str, Any]:
    """Load a configuration file (YAML or JSON).

    Args:
        path: Path to the config file

    Returns:
        Dictionary of configuration values
    """
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}", field="config")
    if path.suffix in (".yaml", ".yml"):
        return load_yaml_file(path)
    elif path.suffix == ".json":
        return load_json_file(path)
    else:
        if ".yaml" in path.name or ".yml" in path.name:
            return load_yaml_file(path)
        return load_json_file(path)


def merge_configs(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """Merge two configuration dictionaries section by section.

    Override values take precedence over base values.
    None values in override do not override base values.

    Args:
        base: Base configuration
        override: Override configuration

    Returns:
        Merged configuration
    """
    result = copy.deepcopy(base)
    for key, value in override.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = merge_configs(result[key], value)
        else:
            result[key] = value
    return result


def find_config(directory: Optional[Path] = None) -> Optional[Path]:
    """First default-named config file in a directory (cwd by default)."""
    directory = directory or Path.cwd()
    for name in DEFAULT_CONFIG_NAMES:
        candidate = directory / name
        if candidate.exists():
            return candidate
    return None


def load_experiment(
    path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """Load an experiment config with CLI overrides applied.

    Args:
        path: Config file; a default-named file in the cwd when omitted
        overrides: Nested values taking precedence over the file

    Returns:
        Validated ExperimentConfig
    """
    path = path or find_config()
    data: Dict[str, Any] = {}
    sources: List[str] = []
    if path is not None:
        data = load_config_file(Path(path))
        sources.append(str(path))
    data = merge_configs(data, overrides or {})
    return config_from_dict(data, sources)


def save_config(config: ExperimentConfig, path: Path) -> Path:
    """Write the canonical form of a config as YAML (JSON without pyyaml)."""
    data = config.to_dict()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if YAML_AVAILABLE and path.suffix in (".yaml", ".yml"):
        with open(path, "w") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=True)
    else:
        with open(path, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
    return path


def create_example_config(path: Optional[Path] = None) -> str:
    """Create an example configuration file content.

    Args:
        path: Optional path to write to (if None, returns content only)

    Returns:
        Example configuration as YAML string
    """
    example = """# Exterior decay lab experiment
# Run with: edlab solve --config experiment.yaml

domain:
  obstacle_radius: 1.0      # r0, the excluded disk
  enclosing_radius: 2.0     # R, the ball B_R around the obstacle
  truncation_radius: 32.0   # R_out, artificial outer circle
  n_radial: 64
  n_angular: 128            # even
  radial_spacing: log       # log or uniform

coefficients:
  # laplace, remark_optimal, rotational, reaction, anisotropic,
  # radial_anisotropic, constant_drift, negative_reaction, sink_drift
  family: remark_optimal
  params:
    p: 2.0

boundary:
  inner: 1.0                # constant or one value per angular node
  outer: dirichlet_matched  # dirichlet_zero, dirichlet_matched, dirichlet_values
  # decay_exponent: 1.0     # defaults to 2/p
  # outer_values: 0.0       # for dirichlet_values

solver:
  tol: 1.0e-10
  max_iter: 5000

verification:
  n_levels: 16
  grad_floor_fraction: 1.0e-3
  n_tau: 17
  identity_tol: 0.05
  coarea_tol: 0.02
  growth_tol: 0.05
  c4_increment_tol: 0.01    # last over first increment of the C4 partial integrals
  # check_levels: [0.2, 0.4]

analysis:
  p: 2.0
  q: [2.0, inf]
  window: [0.125, 0.75]

# sweep:
#   p: [1.0, 2.0, 4.0]
#   grid_scale: [1, 2]

output_dir: runs/remark_optimal
seed: 0
"""

    if path:
        path.write_text(example)

    return example
