from __future__ import annotations

import json as sysjson
import math
import platform
import sys
import typing
from typing import List, TypeVar

import numpy as np
from pydantic import BaseModel
from pygments import formatters, highlight, lexers


def is_output_terminal() -> bool:
    """
    Check if the standard output is attached to a terminal.
    """
    return sys.stdout.isatty()


def enable_windows_ansi_support():
    if platform.system().lower() == "windows" and is_output_terminal():
        import ctypes

        kernel32 = ctypes.windll.kernel32
        kernel32.SetConsoleMode(kernel32.GetStdHandle(-11), 7)


def _plain(obj):
    """Replace non-finite floats by strings so the output stays valid JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def default_json_encoder(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, BaseModel):
        return obj.model_dump()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def to_json(buf, default=default_json_encoder) -> str:
    if isinstance(buf, BaseModel):
        buf = buf.model_dump()
    return sysjson.dumps(_plain(buf), sort_keys=True, indent=4, default=default)


def print_json(buf, colored=None, default=default_json_encoder):
    formatted_json = to_json(buf, default)
    if colored is None:
        if is_output_terminal():
            colored = True
            enable_windows_ansi_support()
        else:
            colored = False

    if colored:
        colorful_json = highlight(formatted_json, lexers.JsonLexer(),
                                  formatters.TerminalTrueColorFormatter(style='stata-dark'))
        print(colorful_json)
    else:
        print(formatted_json)


_T = TypeVar("_T")


def convert_to_type(value: str, _type: _T) -> _T:
    """ usage example:
    convert_to_type("123", int)
    convert_to_type("-2,2,-2,2", List[float])
    """
    if _type in (int, float, str):
        return _type(value)
    if _type == bool:
        return value.strip().lower() in ("true", "1", "yes", "on")
    origin = typing.get_origin(_type)
    if origin is typing.Union:
        args = [a for a in typing.get_args(_type) if a is not type(None)]
        if value.strip().lower() in ("", "none"):
            return None
        return convert_to_type(value, args[0])
    if origin in (list, List):
        (item,) = typing.get_args(_type)
        return [convert_to_type(v.strip(), item) for v in value.split(",") if v.strip()]
    raise NotImplementedError(f"convert {value} to {_type}")


def parse_float_list(value: str) -> List[float]:
    return convert_to_type(value, List[float])
