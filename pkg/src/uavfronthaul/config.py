"""Experiment configuration: a human-readable YAML key tree with strict
unknown-key rejection, dot-path overrides, and named presets.

Every key that carries a physical unit states it in its name (``_deg``,
``_m``, ``_ghz``, ``_dbm``); conversion to the SI/radian quantities used by
the numerical modules happens only in the ``to_*`` builders here.
"""

from __future__ import annotations

import copy
import hashlib
import math
from dataclasses import dataclass

import yaml

from .antenna import ArrayConfig, ElementMode, ElementPattern
from .analytic import BoundConfig
from .channel import LOS_ENVIRONMENTS, ChannelParams, VibrationModel
from .geometry import DeploymentSpec
from .mcsim import SimConfig

__all__ = ["ConfigError", "ExperimentConfig", "PRESETS"]


class ConfigError(ValueError):
    """Invalid experiment configuration; ``violations`` lists every problem."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n" +
                         "\n".join(f"  - {v}" for v in self.violations))


DEFAULTS: dict = {
    "seed": 20240,
    "output_dir": "out",
    "sim": {
        "n_draws": 500_000,
        "n_deployments": 50,
        "gamma_th_db": 9.0,
        "alpha_c_deg": 2.0,
        "block_draws": 65536,
        "phi_grid_points": 91,
        "phi_tune_draws": 4000,
        "cull_rel": 1e-8,
        "workers": 1,
        "deployment_model": "coverage",
    },
    "bound": {
        "d_sectors": 80,
        "sector_mode": "normalized",
        "quad_points": 96,
    },
    "deployment": {
        "n_sbs": 100,
        "n_uav": 10,
        "area_radius_m": 1500.0,
        "uav_height_min_m": 50.0,
        "uav_height_max_m": 100.0,
        "per_uav_links": 10,
        "coverage_radius_m": 400.0,
    },
    "channel": {
        "carrier_ghz": 95.0,
        "tx_power_dbm": 10.0,
        "bandwidth_ghz": 3.0,
        "temperature_k": 293.15,
        "noise_figure_db": 0.0,
        "absorption_per_m": 0.0,
        "los_environment": "urban",
    },
    "vibration": {
        "sigma_x_deg": 1.0,
        "sigma_y_deg": 1.0,
    },
    "antenna": {
        "uav_elements": [15],
        "sbs_elements": 15,
        "spacing_wl": 0.5,
        "element_mode": "3gpp",
        "element_gain_db": 8.0,
    },
    "sweep": {
        "nu_values": [5, 10, 15, 20, 25],
        "alpha_c_values_deg": [1.0, 2.0, 4.0],
        "phi_step_deg": 0.5,
        "theta_d_max_deg": 30.0,
        "theta_d_points": 121,
        "pattern_points": 721,
    },
}

# Named presets: dot-path overrides of the defaults.
PRESETS: dict[str, dict[str, object]] = {
    # Expected interference vs. SBS azimuth orientation for one deployment.
    "fig4_phi_sweep": {
        "antenna.uav_elements": [5, 15, 25],
        "sim.n_deployments": 1,
    },
    # Mean single-neighbor interference term vs. separation angle.
    "fig5_theta_d": {
        "antenna.uav_elements": [5, 15, 25],
    },
    # Deployment-averaged outage vs. UAV array size.
    "fig7_outage_vs_nu": {
        "antenna.uav_elements": [5, 10, 15, 20, 25],
    },
    # Outage sensitivity to jitter spread at fixed array size.
    "fig8_sigma_theta": {
        "antenna.uav_elements": [15],
        "vibration.sigma_x_deg": 1.4,
        "vibration.sigma_y_deg": 1.4,
    },
    # Simulated outage against the analytic upper bound, desk scale.
    "bound_vs_sim": {
        "antenna.uav_elements": [5, 10, 15, 20, 25],
    },
}


def _walk(tree: dict, prefix: str = ""):
    for key, val in tree.items():
        path = f"{prefix}{key}"
        if isinstance(val, dict):
            yield from _walk(val, path + ".")
        else:
            yield path, val


def _lookup_default(path: str):
    node = DEFAULTS
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            raise KeyError(path)
        node = node[part]
    return node


def _coerce(path: str, value, default, errors: list[str]):
    """Check/convert one leaf against the type of its default."""
    if isinstance(default, bool):   # bools are ints; keep them distinct
        if not isinstance(value, bool):
            errors.append(f"{path}: expected a boolean, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{path}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{path}: expected a number, got {value!r}")
            return value
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            errors.append(f"{path}: expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not value:
            errors.append(f"{path}: expected a non-empty list, got {value!r}")
            return value
        kind = type(default[0])
        out = []
        for item in value:
            if kind is float and isinstance(item, (int, float)) \
                    and not isinstance(item, bool):
                out.append(float(item))
            elif kind is int and isinstance(item, int) and not isinstance(item, bool):
                out.append(item)
            else:
                errors.append(f"{path}: list entries must be {kind.__name__}, "
                              f"got {item!r}")
                out.append(item)
        return out
    return value


def _parse_override(path: str, text: str, errors: list[str]):
    """Parse a ``--set path=value`` right-hand side with YAML scalar rules."""
    try:
        default = _lookup_default(path)
    except KeyError:
        errors.append(f"unknown config key in override: {path}")
        return None
    try:
        value = yaml.safe_load(text)
    except yaml.YAMLError:
        errors.append(f"{path}: cannot parse override value {text!r}")
        return None
    return _coerce(path, value, default, errors)


def _set_path(tree: dict, path: str, value):
    node = tree
    parts = path.split(".")
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment configuration tree."""

    tree: dict

    # --- construction -----------------------------------------------------
    @classmethod
    def resolve(cls, file_text: str | None = None, preset: str | None = None,
                overrides: dict[str, str] | None = None) -> "ExperimentConfig":
        """Defaults <- preset <- config file <- ``--set`` overrides.

        Raises ``ConfigError`` listing every violation found.
        """
        errors: list[str] = []
        tree = copy.deepcopy(DEFAULTS)

        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError([f"unknown preset {preset!r}; "
                                   f"choose from {sorted(PRESETS)}"])
            for path, value in PRESETS[preset].items():
                _set_path(tree, path, copy.deepcopy(value))

        if file_text is not None:
            try:
                loaded = yaml.safe_load(file_text) or {}
            except yaml.YAMLError as exc:
                raise ConfigError([f"config file is not valid YAML: {exc}"])
            if not isinstance(loaded, dict):
                raise ConfigError(["config file must contain a key/value tree"])
            for path, value in _walk(loaded):
                try:
                    default = _lookup_default(path)
                except KeyError:
                    errors.append(f"unknown config key: {path}")
                    continue
                if isinstance(default, dict):
                    errors.append(f"{path}: expected a section, got a value")
                    continue
                _set_path(tree, path, _coerce(path, value, default, errors))

        for path, text in (overrides or {}).items():
            value = _parse_override(path, text, errors)
            if value is not None:
                _set_path(tree, path, value)

        cfg = cls(tree)
        errors.extend(cfg._validate())
        if errors:
            raise ConfigError(errors)
        return cfg

    def _validate(self) -> list[str]:
        errors = []
        t = self.tree

        def positive(path, strict=True):
            try:
                v = self[path]
            except KeyError:
                return
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                return   # type errors already reported
            if (v <= 0) if strict else (v < 0):
                bound = "> 0" if strict else ">= 0"
                errors.append(f"{path}: must be {bound}, got {v}")

        for path in ("sim.n_draws", "sim.n_deployments", "sim.block_draws",
                     "sim.phi_grid_points", "sim.phi_tune_draws", "sim.workers",
                     "bound.d_sectors", "bound.quad_points",
                     "deployment.n_sbs", "deployment.n_uav",
                     "deployment.per_uav_links",
                     "deployment.area_radius_m", "deployment.coverage_radius_m",
                     "deployment.uav_height_min_m", "deployment.uav_height_max_m",
                     "channel.carrier_ghz", "channel.bandwidth_ghz",
                     "channel.temperature_k",
                     "antenna.sbs_elements", "antenna.spacing_wl",
                     "sweep.phi_step_deg", "sweep.theta_d_max_deg",
                     "sweep.theta_d_points", "sweep.pattern_points"):
            positive(path)
        for path in ("sim.alpha_c_deg", "sim.cull_rel",
                     "channel.noise_figure_db", "channel.absorption_per_m",
                     "vibration.sigma_x_deg", "vibration.sigma_y_deg"):
            positive(path, strict=False)

        hmin, hmax = t["deployment"]["uav_height_min_m"], \
            t["deployment"]["uav_height_max_m"]
        if isinstance(hmin, float) and isinstance(hmax, float) and hmin > hmax:
            errors.append("deployment.uav_height_min_m: must not exceed "
                          "deployment.uav_height_max_m")
        if t["sim"]["deployment_model"] not in ("coverage", "clustered"):
            errors.append("sim.deployment_model: must be 'coverage' or 'clustered'")
        if t["bound"]["sector_mode"] not in ("normalized", "verbatim"):
            errors.append("bound.sector_mode: must be 'normalized' or 'verbatim'")
        if t["antenna"]["element_mode"] not in ("3gpp", "isotropic"):
            errors.append("antenna.element_mode: must be '3gpp' or 'isotropic'")
        if t["channel"]["los_environment"] not in LOS_ENVIRONMENTS:
            errors.append("channel.los_environment: must be one of "
                          f"{sorted(LOS_ENVIRONMENTS)}")
        uav = t["antenna"]["uav_elements"]
        if isinstance(uav, list) and any(
                isinstance(n, int) and n < 1 for n in uav):
            errors.append("antenna.uav_elements: entries must be >= 1")
        return errors

    # --- access -----------------------------------------------------------
    def __getitem__(self, path: str):
        node = self.tree
        for part in path.split("."):
            node = node[part]
        return node

    def digest(self) -> str:
        """Short hash identifying the fully resolved configuration."""
        lines = sorted(f"{p}={v!r}" for p, v in _walk(self.tree))
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:12]

    def dump(self) -> str:
        """Resolved config as canonical YAML (for --dry-run display)."""
        return yaml.safe_dump(self.tree, sort_keys=True, default_flow_style=None)

    # --- builders ---------------------------------------------------------
    def to_sim_config(self) -> SimConfig:
        s = self.tree["sim"]
        return SimConfig(
            n_draws=s["n_draws"], n_deployments=s["n_deployments"],
            seed=self.tree["seed"], gamma_th_db=s["gamma_th_db"],
            alpha_c=math.radians(s["alpha_c_deg"]), block_draws=s["block_draws"],
            phi_grid_points=s["phi_grid_points"],
            phi_tune_draws=s["phi_tune_draws"], cull_rel=s["cull_rel"],
            workers=s["workers"], deployment_model=s["deployment_model"])

    def to_bound_config(self) -> BoundConfig:
        b, s = self.tree["bound"], self.tree["sim"]
        return BoundConfig(
            n_prime_0=1.0,   # recomputed per link by bound_for_link
            gamma_th=10.0 ** (s["gamma_th_db"] / 10.0),
            j_links=self.tree["deployment"]["per_uav_links"],
            alpha_c=math.radians(s["alpha_c_deg"]),
            d_sectors=b["d_sectors"], sector_mode=b["sector_mode"],
            quad_points=b["quad_points"])

    def to_deployment_spec(self) -> DeploymentSpec:
        d = self.tree["deployment"]
        return DeploymentSpec(
            n_sbs=d["n_sbs"], n_uav=d["n_uav"],
            area_radius=d["area_radius_m"],
            uav_height_range=(d["uav_height_min_m"], d["uav_height_max_m"]),
            per_uav_links=d["per_uav_links"],
            coverage_radius=d["coverage_radius_m"])

    def to_channel_params(self) -> ChannelParams:
        c = self.tree["channel"]
        alpha, beta = LOS_ENVIRONMENTS[c["los_environment"]]
        return ChannelParams(
            f_c=c["carrier_ghz"] * 1e9,
            p_t=1e-3 * 10.0 ** (c["tx_power_dbm"] / 10.0),
            absorption_k=c["absorption_per_m"],
            bandwidth=c["bandwidth_ghz"] * 1e9,
            temperature=c["temperature_k"],
            noise_figure_db=c["noise_figure_db"],
            los_alpha=alpha, los_beta=beta)

    def to_vibration(self) -> VibrationModel:
        v = self.tree["vibration"]
        return VibrationModel.from_degrees(v["sigma_x_deg"], v["sigma_y_deg"])

    def _element(self) -> ElementPattern:
        a = self.tree["antenna"]
        mode = ElementMode.THREE_GPP if a["element_mode"] == "3gpp" \
            else ElementMode.ISOTROPIC
        return ElementPattern(g_max_db=a["element_gain_db"], mode=mode)

    def uav_array_configs(self) -> list[ArrayConfig]:
        a = self.tree["antenna"]
        elem = self._element()
        return [ArrayConfig(n, spacing_wl=a["spacing_wl"], element=elem)
                for n in a["uav_elements"]]

    def sbs_array_config(self) -> ArrayConfig:
        a = self.tree["antenna"]
        return ArrayConfig(a["sbs_elements"], spacing_wl=a["spacing_wl"],
                           element=self._element())
