"""Built-in cartridge registry."""

from __future__ import annotations

from .base import AffinePair, Cartridge, CategoryDef, Quirk, QuirkEvent, StepResult
from .climber import ClimberCartridge
from .invaders import InvadersCartridge
from .paddle import PaddleCartridge

CARTRIDGES: dict[str, Cartridge] = {
    c.id: c for c in (PaddleCartridge(), InvadersCartridge(), ClimberCartridge())
}

GAME_IDS = tuple(sorted(CARTRIDGES))


class UnknownGameError(KeyError):
    pass


def get_cartridge(game_id: str) -> Cartridge:
    try:
        return CARTRIDGES[game_id]
    except KeyError:
        raise UnknownGameError(f"unknown game {game_id!r}; choose from {GAME_IDS}") from None


__all__ = [
    "AffinePair", "CARTRIDGES", "Cartridge", "CategoryDef", "GAME_IDS", "Quirk",
    "QuirkEvent", "StepResult", "UnknownGameError", "get_cartridge",
]
