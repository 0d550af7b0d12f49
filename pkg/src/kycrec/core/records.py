"""Canonical line-delimited JSON for every domain value.

Each line is one JSON object with snake_case field names plus a `record`
discriminator naming the type. Vectors are arrays of decimal floats written
at repr precision, so a dump/load round trip reproduces equal values.
"""

from __future__ import annotations

import collections.abc
import dataclasses
import json
import logging
import types
import typing
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, TypeVar, Union

import numpy as np

from .types import (
    Account,
    CandidateSet,
    ContentItem,
    FollowEdge,
    Interaction,
    RankedList,
    UserProfile,
)

log = logging.getLogger(__name__)

T = TypeVar("T")

_TYPES: dict[str, type] = {}
_NAMES: dict[type, str] = {}


class RecordFormatError(ValueError):
    pass


def register_record(name: str) -> Callable[[type[T]], type[T]]:
    """Class decorator registering a dataclass under a record name."""

    def wrap(cls: type[T]) -> type[T]:
        if not dataclasses.is_dataclass(cls):
            raise TypeError(f"{cls.__name__} is not a dataclass")
        _TYPES[name] = cls
        _NAMES[cls] = name
        return cls

    return wrap


def _encode(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _encode(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (frozenset, set)):
        return sorted(_encode(v) for v in value)
    if isinstance(value, (tuple, list)):
        return [_encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_encode(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(_encode(k)): _encode(v) for k, v in value.items()}
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _decode(value: Any, annotation: Any) -> Any:
    if annotation is Any:
        return value
    origin = typing.get_origin(annotation)
    args = typing.get_args(annotation)

    if origin in (Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _decode(value, inner[0])
    if origin is tuple:
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_decode(v, args[0]) for v in value)
        return tuple(_decode(v, a) for v, a in zip(value, args))
    if origin in (frozenset, set):
        return frozenset(_decode(v, args[0]) for v in value)
    if origin is list:
        return [_decode(v, args[0]) for v in value]
    if origin in (dict, collections.abc.Mapping) or annotation is dict:
        if not args:
            return dict(value)
        return {_decode(k, args[0]): _decode(v, args[1]) for k, v in value.items()}
    if isinstance(annotation, type):
        if issubclass(annotation, Enum):
            return annotation(value)
        if dataclasses.is_dataclass(annotation):
            return build_dataclass(annotation, value)
        if annotation is float:
            return float(value)
        if annotation is int:
            return int(value)
    return value


def build_dataclass(cls: type, data: dict[str, Any]) -> Any:
    """Construct `cls` from decoded JSON data; absent fields take defaults."""
    hints = typing.get_type_hints(cls)
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in data:
            kwargs[f.name] = _decode(data[f.name], hints[f.name])
    return cls(**kwargs)


def to_record(value: Any) -> dict[str, Any]:
    name = _NAMES.get(type(value))
    if name is None:
        raise RecordFormatError(f"{type(value).__name__} is not a registered record")
    return {"record": name, **_encode(value)}


def from_record(record: dict[str, Any]) -> Any:
    data = dict(record)
    name = data.pop("record", None)
    if name not in _TYPES:
        raise RecordFormatError(f"unknown record type {name!r}")
    try:
        return build_dataclass(_TYPES[name], data)
    except (TypeError, KeyError, ValueError) as err:
        raise RecordFormatError(f"bad {name} record: {err}") from err


def dumps(value: Any) -> str:
    return json.dumps(to_record(value), ensure_ascii=False, allow_nan=False)


def loads(line: str) -> Any:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as err:
        raise RecordFormatError(f"invalid JSON line: {err}") from err
    return from_record(record)


def dump_jsonl(values: Iterable[Any], path: Path | str) -> int:
    """Write one record per line; returns the number of records written."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for value in values:
            fh.write(dumps(value))
            fh.write("\n")
            count += 1
    log.debug("Wrote %d records to %s", count, path)
    return count


def load_jsonl(path: Path | str) -> list[Any]:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                values.append(loads(line))
            except RecordFormatError as err:
                raise RecordFormatError(f"{path}:{lineno}: {err}") from err
    return values


for _name, _cls in (
    ("user", UserProfile),
    ("item", ContentItem),
    ("account", Account),
    ("edge", FollowEdge),
    ("interaction", Interaction),
    ("ranked_list", RankedList),
    ("candidate_set", CandidateSet),
):
    register_record(_name)(_cls)
