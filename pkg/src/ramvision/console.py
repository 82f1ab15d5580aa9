"""The deterministic mini-console VM.

Owns the 128-byte RAM, a frame counter and a seeded RNG stream; advances a
cartridge one tick per action and renders frames on demand. Rendering is a
pure function of (RAM, frame counter, the quirk draws committed during the
tick), so rendering any number of times between ticks yields identical
pixels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .games import Cartridge, QuirkEvent, get_cartridge
from .games.base import RAM_SIZE
from .model import FRAME_HEIGHT, FRAME_WIDTH, Frame, ObjectList
from .rng import Xorshift64


class ConsoleError(RuntimeError):
    pass


class EpisodeOverError(ConsoleError):
    """tick() called after termination."""


@dataclass(frozen=True)
class SavedState:
    """Value-semantic console snapshot; restore() is an exact identity."""

    game_id: str
    ram: bytes
    frame_counter: int
    rng_state: int
    quirk_draws: tuple[int, ...]
    terminated: bool
    freeze_ram: Optional[bytes]
    freeze_frame_counter: int
    freeze_draws: tuple[int, ...]


class Console:
    """One cartridge + one RAM + one RNG stream; single-owner, no locking."""

    def __init__(self, cartridge: Cartridge, seed: int,
                 quirks: Optional[frozenset[str]] = None) -> None:
        self.cartridge = cartridge
        self.seed = seed
        self.quirks = cartridge.quirk_names() if quirks is None else frozenset(quirks)
        self.rng = Xorshift64(seed)
        self.ram = bytearray(cartridge.init_ram())
        if len(self.ram) != RAM_SIZE:
            raise ConsoleError(f"cartridge {cartridge.id} RAM is not {RAM_SIZE} bytes")
        self.frame_counter = 0
        self.terminated = False
        self._quirk_draws = cartridge.draw_quirk_values(self.rng)
        self._freeze_ram: Optional[bytes] = None
        self._freeze_fc = 0
        self._freeze_draws: tuple[int, ...] = ()
        self.last_quirk_events: list[QuirkEvent] = []

    # --- stepping -----------------------------------------------------------

    def tick(self, action: int) -> tuple[int, bool]:
        """Advance one tick. Returns (reward, terminated)."""
        if self.terminated:
            raise EpisodeOverError(f"{self.cartridge.id} episode is over; reset first")
        if not 0 <= action < len(self.cartridge.actions):
            raise ValueError(
                f"action {action} outside {self.cartridge.id} action set "
                f"(0..{len(self.cartridge.actions) - 1})"
            )
        addr = self.cartridge.freeze_addr
        if addr is not None and self.ram[addr] > 0:
            # frozen: only the countdown advances
            self.ram[addr] -= 1
            if self.ram[addr] == 0:
                self._freeze_ram = None
            reward, terminated = 0, False
        else:
            prev = bytes(self.ram)
            result = self.cartridge.step(self.ram, action, self.rng)
            if result.freeze:
                # replay target: the last frame the player saw before the event
                self._freeze_ram = prev
                self._freeze_fc = self.frame_counter
                self._freeze_draws = self._quirk_draws
            reward, terminated = result.reward, result.terminated
        self.frame_counter += 1
        self._quirk_draws = self.cartridge.draw_quirk_values(self.rng)
        self.terminated = terminated
        return reward, terminated

    # --- rendering ----------------------------------------------------------

    def render(self) -> Frame:
        canvas = np.zeros((FRAME_HEIGHT, FRAME_WIDTH), dtype=np.uint8)
        frozen = (
            "freeze_replay" in self.quirks
            and self._freeze_ram is not None
            and self.cartridge.freeze_addr is not None
            and self.ram[self.cartridge.freeze_addr] > 0
        )
        if frozen:
            events = self.cartridge.draw(
                canvas, self._freeze_ram, self._freeze_fc, self._freeze_draws, self.quirks)
            events.append(QuirkEvent("freeze"))
        else:
            events = self.cartridge.draw(
                canvas, bytes(self.ram), self.frame_counter, self._quirk_draws, self.quirks)
        self.last_quirk_events = events
        return Frame(canvas, self.cartridge.palette.palette_id)

    def ground_truth_objects(self) -> ObjectList:
        return ObjectList(self.cartridge.ground_truth(bytes(self.ram)), self.frame_counter)

    # --- RAM access ---------------------------------------------------------

    def peek(self, addr: int) -> int:
        if not 0 <= addr < RAM_SIZE:
            raise IndexError(f"RAM address {addr} out of range")
        return self.ram[addr]

    def poke(self, addr: int, value: int) -> None:
        if not 0 <= addr < RAM_SIZE:
            raise IndexError(f"RAM address {addr} out of range")
        if not 0 <= value <= 255:
            raise ValueError(f"byte value {value} out of range")
        self.ram[addr] = value

    # --- snapshot / restore ---------------------------------------------------

    def snapshot(self) -> SavedState:
        return SavedState(
            game_id=self.cartridge.id,
            ram=bytes(self.ram),
            frame_counter=self.frame_counter,
            rng_state=self.rng.getstate(),
            quirk_draws=self._quirk_draws,
            terminated=self.terminated,
            freeze_ram=self._freeze_ram,
            freeze_frame_counter=self._freeze_fc,
            freeze_draws=self._freeze_draws,
        )

    def restore(self, state: SavedState) -> None:
        if state.game_id != self.cartridge.id:
            raise ConsoleError(
                f"saved state is for {state.game_id!r}, console runs {self.cartridge.id!r}"
            )
        self.ram = bytearray(state.ram)
        self.frame_counter = state.frame_counter
        self.rng.setstate(state.rng_state)
        self._quirk_draws = state.quirk_draws
        self.terminated = state.terminated
        self._freeze_ram = state.freeze_ram
        self._freeze_fc = state.freeze_frame_counter
        self._freeze_draws = state.freeze_draws


def create(game_id: str, seed: int, quirks: Optional[frozenset[str]] = None,
           enable_quirks: bool = True) -> Console:
    """Build a console for a registered cartridge.

    `quirks` selects individual quirk names; `enable_quirks=False` disables
    the whole declared set (the CLI's --no-quirks).
    """
    cartridge = get_cartridge(game_id)
    if quirks is None:
        quirks = cartridge.quirk_names() if enable_quirks else frozenset()
    unknown = quirks - cartridge.quirk_names()
    if unknown:
        raise ConsoleError(f"unknown quirks for {game_id}: {sorted(unknown)}")
    return Console(cartridge, seed, quirks)
