"""Reading and writing instance files of every supported family."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import InputError
from .game import GameInstance, game_from_dict, game_to_dict
from .models import cfld, kpg, nfg, qipg

KINDS = ("game", "kpg", "bkp", "nfg", "cfld", "qipg")


@dataclass
class LoadedInstance:
    kind: str
    game: GameInstance
    source: Any  # the family-specific instance object, or the raw dict for generic games

    def group_key(self) -> tuple:
        """Key used to average results over related instances."""
        s = self.source
        if self.kind == "kpg":
            return ("kpg", s.n, s.m, s.dist or "-")
        if self.kind == "nfg":
            return ("nfg", s.V, len(s.edges))
        if self.kind == "qipg":
            return ("qipg", s.n, s.m)
        if self.kind == "cfld":
            return ("cfld", s.n, s.L, s.J)
        return (self.kind, self.game.n, sum(self.game.dims()))


def read_json(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a JSON object at the top level")
    return data


def detect_kind(data: dict) -> str:
    kind = data.get("type")
    if kind is not None:
        if kind not in KINDS:
            raise InputError(f"unknown instance type {kind!r}; expected one of {KINDS}")
        return kind
    keys = set(data)
    if {"a", "b", "A", "B"} <= keys:
        return "bkp"
    if {"V", "E"} <= keys:
        return "nfg"
    if {"L", "J", "u", "f"} <= keys:
        return "cfld"
    if "Q" in keys:
        return "qipg"
    if {"p", "w", "b", "C"} <= keys:
        return "kpg"
    if "players" in keys:
        return "game"
    raise InputError("cannot tell the instance type; add a 'type' field")


def from_dict(data: dict, name: str = "", strategic: bool = True) -> LoadedInstance:
    kind = detect_kind(data)
    if kind == "kpg":
        src = kpg.KpgInstance.from_dict(data, name)
        return LoadedInstance(kind, kpg.build_kpg(src, strategic), src)
    if kind == "bkp":
        src = kpg.BkpInstance.from_dict(data)
        game = kpg.reduce_bkp(src, strategic)
        object.__setattr__(game, "name", name or game.name)
        return LoadedInstance(kind, game, src)
    if kind == "nfg":
        src = nfg.NfgInstance.from_dict(data, name)
        return LoadedInstance(kind, nfg.build_nfg(src), src)
    if kind == "cfld":
        src = cfld.CfldInstance.from_dict(data, name)
        return LoadedInstance(kind, cfld.build_cfld(src), src)
    if kind == "qipg":
        src = qipg.QipgInstance.from_dict(data, name)
        return LoadedInstance(kind, qipg.build_qipg(src), src)
    return LoadedInstance(kind, game_from_dict(data, name), data)


def load(path: str | Path, strategic: bool = True) -> LoadedInstance:
    return from_dict(read_json(path), Path(path).stem, strategic)


def to_dict(obj) -> dict:
    if isinstance(obj, GameInstance):
        return {"type": "game", **game_to_dict(obj)}
    return obj.to_dict()


def save(obj, path: str | Path) -> None:
    Path(path).write_text(json.dumps(to_dict(obj), indent=1) + "\n")
