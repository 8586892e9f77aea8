"""
JSON configuration files of the command-line subcommands, validated into
dataclasses. Errors carry the file path and the line of the offending field.
"""
import json
import os
import re
from dataclasses import dataclass, field, fields, MISSING

from ssprisk.constants import POP_INNER_TOL
from ssprisk.solver import SolverConfig
from ssprisk.risk import ExperimentConfig
from ssprisk.utils import check_seed
from ssprisk.shifted import ShiftedProcessConfig


class ConfigError(ValueError):
    """Invalid configuration file, with path and line number."""
    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self):
        where = '' if self.path is None else f"{self.path}"
        if self.line is not None:
            where += f":{self.line}"
        return f"{where}: {self.message}" if where else self.message


@dataclass
class SolveConfig:
    """
    Configuration of `ssprisk solve`: the population problem of `instance`,
    or its empirical problem for a sample of size `n` drawn with `seed`.
    """
    instance: dict
    solver: SolverConfig = field(default_factory=SolverConfig)
    problem: str = 'population'
    n: int = None
    seed: int = 0

    def __post_init__(self):
        check_seed(self.seed)
        if self.problem not in ['population', 'empirical']:
            raise ValueError("'problem' must be 'population' or 'empirical', "
                             f"got {self.problem!r}")
        if self.problem == 'empirical' and (not isinstance(self.n, int)
                                            or self.n < 1):
            raise ValueError("'n' must be a positive integer for the "
                             "empirical problem")


@dataclass
class VerifyConfig:
    """
    Configuration of `ssprisk verify`: assumption probes and gradient
    check of `instance`.
    """
    instance: dict
    n_probe: int = 1000
    seed: int = 0
    gradient_points: int = 200
    rtol: float = 1e-6

    def __post_init__(self):
        check_seed(self.seed)
        if not isinstance(self.n_probe, int) or self.n_probe < 2:
            raise ValueError("'n_probe' must be an integer >= 2")
        if not isinstance(self.gradient_points, int) or \
                self.gradient_points < 1:
            raise ValueError("'gradient_points' must be a positive integer")
        if not self.rtol > 0:
            raise ValueError("'rtol' must be positive")


CONFIG_CLASSES = {
    'solve': SolveConfig,
    'experiment': ExperimentConfig,
    'verify': VerifyConfig,
    'shifted': ShiftedProcessConfig
}


def _line_of(text, key):
    """Line (1-based) of the first occurrence of "key" in the JSON text."""
    pattern = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for (il, line) in enumerate(text.splitlines()):
        if pattern.search(line):
            return il + 1
    return 1


def read_json(path):
    """Read a JSON object; returns (dict, raw text)."""
    try:
        with open(path, 'r') as f:
            text = f.read()
    except OSError as err:
        raise ConfigError(f"Cannot read config: {err.strerror}", path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"Malformed JSON: {err.msg}", path, err.lineno)
    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object", path, 1)
    return data, text


def parse_config(data, kind, text='', path=None):
    """
    Validate the dict `data` into the config dataclass of subcommand `kind`.

    Raises
    ------
    ConfigError
        On unknown or missing fields and on invalid values.
    """
    if kind not in CONFIG_CLASSES:
        raise ValueError(f"Unknown config kind '{kind}'")
    cls = CONFIG_CLASSES[kind]
    names = [f.name for f in fields(cls)]
    data = dict(data)

    for key in data:
        if key not in names:
            raise ConfigError(f"Unknown field '{key}' in {kind} config",
                              path, _line_of(text, key))
    for f in fields(cls):
        if f.default is MISSING and f.default_factory is MISSING \
                and f.name not in data:
            raise ConfigError(f"Missing required field '{f.name}' in {kind} "
                              "config", path, 1)

    for key in ['solver', 'oracle']:
        if key in data:
            if not isinstance(data[key], dict):
                raise ConfigError(f"'{key}' must be a JSON object", path,
                                  _line_of(text, key))
            sub = dict(data[key])
            if key == 'oracle':
                sub.setdefault('inner_tolerance', POP_INNER_TOL)
            try:
                data[key] = SolverConfig.from_dict(sub)
            except (ValueError, TypeError) as err:
                raise ConfigError(str(err), path, _line_of(text, key))

    if 'threads' in names and os.environ.get('SSP_THREADS') is not None:
        try:
            data['threads'] = int(os.environ['SSP_THREADS'])
        except ValueError:
            raise ConfigError("SSP_THREADS must be an integer", path)

    try:
        return cls(**data)
    except (ValueError, TypeError) as err:
        message = str(err)
        quoted = re.findall(r"'(\w+)'", message)
        line = _line_of(text, quoted[0]) if quoted else 1
        raise ConfigError(message, path, line)


def load_config(path, kind):
    """Read and validate the config file of subcommand `kind`.

    Returns
    -------
    config : dataclass
    data : dict
        The raw JSON object (hashed into the run manifest).
    """
    data, text = read_json(path)
    return parse_config(data, kind, text, path), data
