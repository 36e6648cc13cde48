"""Scenario file parsing, validation and canonical serialisation.

One YAML document describes a complete run: room, front-end numerology,
noise, power budget, strategy selection, receiver, orientation model, Monte
Carlo settings and optimizer options. Keys carry their unit in the name;
unknown sections or keys are rejected with the offending path. Defaults
reproduce the standard parameter set, so an empty file is a valid scenario.
"""

import math
from dataclasses import dataclass

import yaml

from .channel import FrontEndModel
from .evaluator import McConfig
from .geometry import OrientationModel, RoomConfig
from .link import NoiseModel
from .optimizer import OptimizerOptions
from .strategies import StrategyConfig, SystemParams


class ScenarioError(ValueError):
    """Scenario file failed to parse or validate."""


_NUM = "num"
_INT = "int"
_BOOL = "bool"
_STR = "str"
_CLUSTERS = "clusters"  # positive int or the string "best"

# section -> key -> (type tag, default)
SCHEMA = {
    "room": {
        "width_m": (_NUM, 5.0),
        "length_m": (_NUM, 5.0),
        "height_m": (_NUM, 3.0),
        "tx_height_m": (_NUM, 3.0),
        "rx_height_m": (_NUM, 0.75),
    },
    "frontend": {
        "modulation_bandwidth_mhz": (_NUM, 50.0),
        "led_bandwidth_mhz": (_NUM, 35.0),
        "pd_bandwidth_mhz": (_NUM, 106.0),
        "rrc_rolloff": (_NUM, 0.2),
        "fft_size": (_INT, 256),
        "cp_length": (_INT, 30),
    },
    "noise": {
        "load_resistance_ohm": (_NUM, 50.0),
        "temperature_k": (_NUM, 300.0),
    },
    "power": {
        "total_optical_w": (_NUM, 80.0),
        "clipping_level": (_NUM, 3.2),
        "gap_factor_db": (_NUM, 6.06),
    },
    "receiver": {
        "kind": (_STR, "pr"),
        "elevation_deg": (_NUM, 40.0),
        "area_cm2": (_NUM, 1.0),
        "quantum_efficiency": (_NUM, 0.8),
        "filter_transmittance": (_NUM, 1.0),
        "filter_index": (_NUM, 2.0),
    },
    "strategy": {
        "kind": (_STR, "sd"),
        "elements": (_INT, 4),
        "clusters": (_CLUSTERS, "best"),
        "processing": (_BOOL, True),
        "half_power_semiangle_deg": (_NUM, 60.0),
        "fov_coefficient": (_NUM, 1.4738),
        "wavelength_min_nm": (_NUM, 400.0),
        "wavelength_max_nm": (_NUM, 700.0),
    },
    "orientation": {
        "model": (_STR, "upward"),
    },
    "monte_carlo": {
        "samples": (_INT, 500),
        "seed": (_INT, 1234),
    },
    "optimizer": {
        "starts": (_INT, 10),
        "samples": (_INT, 200),
        "max_iterations": (_INT, 200),
        "poll_threshold": (_NUM, 1e-6),
        "search_candidates": (_INT, 8),
    },
}


@dataclass(frozen=True)
class Scenario:
    """Validated scenario: built objects plus the canonical key/value tree."""

    params: SystemParams
    strategy: StrategyConfig
    orientation: OrientationModel
    mc: McConfig
    optimizer_options: OptimizerOptions
    optimizer_starts: int
    optimizer_samples: int
    data: dict


def _check_type(path: str, value, tag):
    if tag == _NUM:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if tag == _INT:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"{path}: expected an integer, got {value!r}")
        return value
    if tag == _BOOL:
        if not isinstance(value, bool):
            raise ScenarioError(f"{path}: expected true/false, got {value!r}")
        return value
    if tag == _STR:
        if not isinstance(value, str):
            raise ScenarioError(f"{path}: expected a string, got {value!r}")
        return value
    if tag == _CLUSTERS:
        if value == "best":
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"{path}: expected a cluster count or 'best', got {value!r}")
        return value
    raise AssertionError(tag)


def _merge_with_defaults(user: dict) -> dict:
    if user is None:
        user = {}
    if not isinstance(user, dict):
        raise ScenarioError("scenario document must be a key/value mapping")
    for section in user:
        if section not in SCHEMA:
            raise ScenarioError(f"unknown section {section!r}")
        if user[section] is None:
            continue
        if not isinstance(user[section], dict):
            raise ScenarioError(f"section {section!r} must be a mapping")
        for key in user[section]:
            if key not in SCHEMA[section]:
                raise ScenarioError(f"unknown key {section}.{key}")
    merged = {}
    for section, keys in SCHEMA.items():
        merged[section] = {}
        src = user.get(section) or {}
        for key, (tag, default) in keys.items():
            value = src.get(key, default)
            merged[section][key] = _check_type(f"{section}.{key}", value, tag)
    return merged


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario YAML text."""
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"invalid YAML: {exc}") from exc
    data = _merge_with_defaults(raw)

    room_d, fe_d = data["room"], data["frontend"]
    noise_d, power_d = data["noise"], data["power"]
    rx_d, strat_d = data["receiver"], data["strategy"]

    try:
        room = RoomConfig(room_d["width_m"], room_d["length_m"], room_d["height_m"],
                          room_d["tx_height_m"], room_d["rx_height_m"])
        symbol_period = 1.0 / (2.0 * fe_d["modulation_bandwidth_mhz"] * 1e6)
        frontend = FrontEndModel(fe_d["led_bandwidth_mhz"] * 1e6,
                                 fe_d["pd_bandwidth_mhz"] * 1e6,
                                 fe_d["rrc_rolloff"], symbol_period,
                                 fe_d["fft_size"], fe_d["cp_length"])
        noise = NoiseModel(noise_d["load_resistance_ohm"], noise_d["temperature_k"],
                           frontend.signalling_bandwidth)

        lam_lo = strat_d["wavelength_min_nm"] * 1e-9
        lam_hi = strat_d["wavelength_max_nm"] * 1e-9
        if not 400e-9 - 1e-15 <= lam_lo < lam_hi <= 700e-9 + 1e-15:
            raise ScenarioError(
                "strategy.wavelength_min_nm/max_nm must satisfy 400 <= min < max <= 700")
        params = SystemParams(
            room=room, frontend=frontend, noise=noise,
            total_power=power_d["total_optical_w"],
            clipping_level=power_d["clipping_level"],
            gap_db=power_d["gap_factor_db"],
            pd_area=rx_d["area_cm2"] * 1e-4,
            quantum_efficiency=rx_d["quantum_efficiency"],
            filter_index=rx_d["filter_index"],
            filter_transmittance=rx_d["filter_transmittance"],
            band=(lam_lo, lam_hi),
        )

        clusters = strat_d["clusters"]
        strategy = StrategyConfig(
            kind=strat_d["kind"],
            elements=strat_d["elements"],
            receiver_kind=rx_d["kind"],
            pd_elevation=math.radians(rx_d["elevation_deg"]),
            processing=strat_d["processing"],
            clusters=None if clusters == "best" else clusters,
            half_power_semiangle=math.radians(strat_d["half_power_semiangle_deg"]),
            fov_coefficient=strat_d["fov_coefficient"],
        )

        model_name = data["orientation"]["model"]
        if model_name == "upward":
            orientation = OrientationModel.upward()
        elif model_name == "random":
            orientation = OrientationModel.handheld()
        else:
            raise ScenarioError(f"orientation.model: expected 'upward' or 'random', "
                                f"got {model_name!r}")
        mc = McConfig(data["monte_carlo"]["samples"], data["monte_carlo"]["seed"],
                      orientation)

        opt_d = data["optimizer"]
        options = OptimizerOptions(max_iterations=opt_d["max_iterations"],
                                   poll_threshold=opt_d["poll_threshold"],
                                   n_search=opt_d["search_candidates"])
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    return Scenario(params, strategy, orientation, mc, options,
                    opt_d["starts"], opt_d["samples"], data)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        return parse_scenario(text)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical YAML: every key present, schema order, explicit units."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"{section}:")
        for key in keys:
            value = scenario.data[section][key]
            lines.append(f"  {key}: {_format_value(value)}")
    return "\n".join(lines) + "\n"


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        text = repr(value)
        if "e" in text and "." not in text:
            text = text.replace("e", ".0e")  # YAML floats need a dot
        return text
    if isinstance(value, int):
        return str(value)
    return value
