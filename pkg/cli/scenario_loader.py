"""
Strict JSON scenario parsing.
Unknown keys, wrong types and every Scenario validation surface as
ScenarioError naming the field and, where it can be found, its line.
"""

import json
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from filters.types import resolve_q0
from numkit.errors import ScenarioError
from services.simulation_service import (
    DEFAULT_TRUTH_DT,
    STEADY_STATE,
    InputEvent,
    MeasurementNoise,
    Scenario,
)

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {
    "model", "params", "t_end", "truth_dt", "events", "noise", "q_scale", "fps",
    "init", "p0", "nominal_inputs", "order_offset",
}
EVENT_KEYS = {"t", "input", "value"}
NOISE_KEYS = {"input_std", "output_std", "seed"}
REQUIRED_KEYS = ("model", "t_end", "fps")


def _reject_duplicates(pairs):
    data = {}
    for key, value in pairs:
        if key in data:
            raise ScenarioError("duplicate key", key)
        data[key] = value
    return data


def _line_of(text: str, key: str) -> Optional[int]:
    match = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, match.start()) + 1 if match else None


def _number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"expected a number, got {value!r}", field)
    return float(value)


def _number_list(value: Any, field: str) -> List[float]:
    if not isinstance(value, list):
        raise ScenarioError(f"expected a list of numbers, got {value!r}", field)
    return [_number(v, f"{field}[{i}]") for i, v in enumerate(value)]


def _object(value: Any, field: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ScenarioError(f"expected an object, got {value!r}", field)
    return value


def _check_keys(data: Dict[str, Any], allowed, field: str = ""):
    for key in data:
        if key not in allowed:
            name = f"{field}.{key}" if field else key
            raise ScenarioError(f"unknown key; allowed: {', '.join(sorted(allowed))}", name)


def _events(value: Any) -> List[InputEvent]:
    if not isinstance(value, list):
        raise ScenarioError(f"expected a list, got {value!r}", "events")
    events = []
    for i, item in enumerate(value):
        field = f"events[{i}]"
        item = _object(item, field)
        _check_keys(item, EVENT_KEYS, field)
        missing = EVENT_KEYS - set(item)
        if missing:
            raise ScenarioError(f"missing {', '.join(sorted(missing))}", field)
        if not isinstance(item["input"], str):
            raise ScenarioError(f"expected an input name, got {item['input']!r}", f"{field}.input")
        events.append(InputEvent(_number(item["t"], f"{field}.t"), item["input"],
                                 _number(item["value"], f"{field}.value")))
    return events


def _noise(value: Any) -> MeasurementNoise:
    value = _object(value, "noise")
    _check_keys(value, NOISE_KEYS, "noise")
    seed = value.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError(f"expected an integer, got {seed!r}", "noise.seed")
    return MeasurementNoise(
        input_std=_number(value.get("input_std", 0.0), "noise.input_std"),
        output_std=_number(value.get("output_std", 0.0), "noise.output_std"),
        seed=seed,
    )


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    """
    Builds a validated Scenario and its model from a decoded JSON object.

    Raises:
        ScenarioError: On unknown or missing keys, wrong types or failed validation
    """
    data = _object(data, "scenario")
    _check_keys(data, TOP_LEVEL_KEYS)
    for key in REQUIRED_KEYS:
        if key not in data:
            raise ScenarioError("missing required key", key)
    if not isinstance(data["model"], str):
        raise ScenarioError(f"expected a model name, got {data['model']!r}", "model")

    init = data.get("init", STEADY_STATE)
    if not isinstance(init, str):
        init = _number_list(init, "init")
    q_scale = {k: _number(v, f"q_scale.{k}") for k, v in _object(data.get("q_scale", {}), "q_scale").items()}
    nominal = data.get("nominal_inputs")

    scenario = Scenario(
        model=data["model"],
        t_end=_number(data["t_end"], "t_end"),
        fps=_number_list(data["fps"], "fps"),
        params=dict(_object(data.get("params", {}), "params")),
        truth_dt=_number(data.get("truth_dt", DEFAULT_TRUTH_DT), "truth_dt"),
        events=_events(data.get("events", [])),
        noise=_noise(data.get("noise", {})),
        q_scale=q_scale,
        init=init,
        p0=_number(data.get("p0", 1e-4), "p0"),
        nominal_inputs=None if nominal is None else _number_list(nominal, "nominal_inputs"),
        order_offset=_number(data.get("order_offset", 1e-2), "order_offset"),
    )
    # Model-dependent checks: model name, parameter overrides, event inputs, q_scale keys
    model = scenario.build_model()
    resolve_q0(model, scenario.q_scale)
    return scenario


def parse_scenario(text: str, source: Union[str, Path] = "<scenario>") -> Scenario:
    """
    Parses scenario JSON text.

    Raises:
        ScenarioError: With source, line and field when available
    """
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{source}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from e
    except ScenarioError as e:
        raise ScenarioError(f"{source}: {e}", e.field) from e
    try:
        return scenario_from_dict(data)
    except ScenarioError as e:
        top = (e.field or "").split(".")[0].split("[")[0]
        line = _line_of(text, top) if top else None
        where = f"{source}:{line}" if line else f"{source}"
        raise ScenarioError(f"{where}: {e}", e.field) from e


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Reads and validates a scenario file.

    Raises:
        ScenarioError: If the file is unreadable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read {path}: {e.strerror or e}", "scenario") from e
    scenario = parse_scenario(text, path)
    logger.info(f"Loaded scenario {path.name}: model {scenario.model}, t_end {scenario.t_end:g} s, "
                f"fps {scenario.fps}")
    return scenario
