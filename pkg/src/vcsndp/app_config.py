"""A module for managing application configuration in a thread-safe manner."""
import threading
import os
import logging
from typing import Any, List, Union
from functools import reduce
import operator

import yaml

logger = logging.getLogger(__name__)

# Launcher scripts may set this.  The default configuration file lives at the root of the app.
app_root = os.environ.get('APP_ROOT')

# The configuration dictionary for the application
_CONFIG = {}

# Lock for accessing configuration
_CONFIG_LOCK = threading.Lock()

# Expected types of the keys that may appear.  Anything missing falls back to library defaults.
_SCHEMA = [
    (['builder'], dict),
    (['builder', 'c_mult'], int),
    (['builder', 'zeta'], (int, float)),
    (['builder', 'max_escalations'], int),
    (['builder', 'escalation_factor'], (int, float)),
    (['builder', 'start_attempts'], int),
    (['builder', 'audit_every'], int),
    (['builder', 'random_beta_budget'], int),
    (['verifier'], dict),
    (['verifier', 'weak_budget'], int),
    (['pipeline'], dict),
    (['pipeline', 'subsolver'], str),
    (['pipeline', 'exact_edge_cap'], int),
    (['pipeline', 'workers'], int),
    (['log_level'], str),
]


def default_config_file() -> str:
    """The configuration file used when none is given on the command line.

    cfg.yaml at APP_ROOT when the launcher set it, otherwise cfg.yaml in the working directory.
    """
    if app_root is None:
        return "cfg.yaml"
    return os.path.join(app_root, "cfg.yaml")


def _get_from_dict(d: dict, key_list: list):
    """Query a value from a nested dictionary using a list of keys."""
    return reduce(operator.getitem, key_list, d)


def parse_config_file(filename: str):
    """Process an application level configuration file

    Args:
        filename:  The name of the file parse
    """
    # pylint: disable=global-variable-not-assigned
    global _CONFIG, _CONFIG_LOCK
    with _CONFIG_LOCK:
        try:
            with open(filename, mode="r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f)
            _CONFIG = {} if loaded is None else loaded

        except yaml.YAMLError as exc:
            # Print out the portion of config file near the error.
            if hasattr(exc, 'problem_mark'):
                line = exc.problem_mark.line + 1
                column = exc.problem_mark.column
                logger.error("Error parsing %s near line %s column %s", filename, line, column)
            else:
                logger.error("Error parsing config: %s", exc)
            raise

        except Exception as exc:
            logger.error("Error reading file %s': %s", filename, exc)
            raise exc


def clear_config():
    """Clear the configuration"""
    # pylint: disable=global-variable-not-assigned
    global _CONFIG, _CONFIG_LOCK
    with _CONFIG_LOCK:
        _CONFIG = {}


def set_parameter(key: Union[str, List[str]], value: Any):
    """Set an individual _CONFIG parameter.  Thread safe.

    Missing intermediate dictionaries are created, so set_parameter(["builder", "zeta"], 2.0) works on an empty
    configuration.

    Args:
        key:  A string for top level parameter.  A list of strings where each string is key on the path to the desired
            parameter.  Example key = ["builder", "zeta"] would set _CONFIG["builder"]["zeta"], while
            key = "builder" would set _CONFIG["builder"].
        value:  The value to set.  Can be any object.
    """
    # pylint: disable=global-variable-not-assigned
    global _CONFIG, _CONFIG_LOCK
    with _CONFIG_LOCK:
        if isinstance(key, str):
            _CONFIG[key] = value
        elif len(key) == 1:
            _CONFIG[key[0]] = value
        else:
            d = _CONFIG
            for name in key[:-1]:
                if not isinstance(d.get(name), dict):
                    d[name] = {}
                d = d[name]
            d[key[-1]] = value


def get_parameter(key: Union[str, List[str], None]) -> Any:
    """Get an individual _CONFIG parameter.  If key is None, return entire dictionary.  Thread safe.

    Args:
        key:  A string for top level parameter.  A list of strings where each string is key on the path to the desired
            parameter.  Example key = ["builder", "zeta"] would query _CONFIG["builder"]["zeta"], while
            key = "builder" would query _CONFIG["builder"].
    """
    # pylint: disable=global-variable-not-assigned
    global _CONFIG_LOCK
    with _CONFIG_LOCK:
        return _get_parameter(key)


def _get_parameter(key: Union[str, List[str], None]) -> Any:
    """Get an individual config parameter.  If key is None, return entire dictionary.  Not thread safe, internal use."""
    # pylint: disable=global-variable-not-assigned
    global _CONFIG
    out = None
    try:
        if key is None:
            out = _CONFIG
        elif isinstance(key, str):
            out = _CONFIG[key]
        else:
            out = _get_from_dict(_CONFIG, key)
    except (KeyError, TypeError):
        # It's OK to request a parameter that doesn't exist, you get None back
        pass

    return out


def validate_config():
    """Make sure that every configuration setting that is present has the correct type."""
    # pylint: disable=global-variable-not-assigned
    global _CONFIG_LOCK
    with _CONFIG_LOCK:
        for key, typ in _SCHEMA:
            value = _get_parameter(key)
            if value is None:
                continue
            # bool is an int subclass, but never what the user meant here
            if isinstance(value, bool) or not isinstance(value, typ):
                name = ".".join(key)
                logger.error("Config parameter '%s' is not required type '%s'.  Received '%s' of type '%s'",
                             name, typ, value, type(value))
                raise ValueError(f"Config parameter '{name}' is not required type '{typ}'."
                                 f"  Received '{value}' of type '{type(value)}'")

        subsolver = _get_parameter(['pipeline', 'subsolver'])
        if subsolver is not None and subsolver not in ("exact", "reverse-delete"):
            raise ValueError(f"Unsupported subsolver '{subsolver}'.  Options are 'exact' or 'reverse-delete'.")
