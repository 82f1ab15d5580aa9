"""Invaders: bitmap alien grid hanging off anchor bytes, with blink/jitter
quirks on the player missile and explosion particle effects.

RAM map (normative):
  ram[0..6)   alien bitmap, bit j (j < 6) of ram[i] = alien alive at row i, col j
  ram[6]      player ship x
  ram[7]      player missile x
  ram[8]      player missile y
  ram[9]      player missile flags: bit 0 active, bit 1 blink phase
  ram[10]     enemy missile x
  ram[11]     enemy missile y
  ram[12]     enemy missile active (nonzero)
  ram[13]     alien grid anchor x
  ram[14]     alien grid anchor y
  ram[15..18) shield hit points 0..4 (rendered width = 4 * hp)
  ram[18]     explosion timer (rendered particle, never a REM/oracle object)
  ram[19]     explosion x
  ram[20]     explosion y
  ram[21]     lives (HUD)
  ram[22]     score low byte (HUD)
  ram[23]     score high byte (HUD)
  ram[24]     grid drift direction (0 = right, 1 = left)
  ram[25]     grid drift phase counter (0..3)
"""

from __future__ import annotations

import numpy as np

from ..model import GameObject, Palette
from ..rem import BitmapGridEntry, DecoderSpec, DirectEntry, Presence, ValueRule
from ..rng import Xorshift64
from ..vem import Region, VisionRule, VisionSpec
from .base import (
    AffinePair,
    Cartridge,
    CategoryDef,
    Quirk,
    QuirkEvent,
    StepResult,
    boxes_overlap,
    clipped_object,
    draw_number,
    draw_rect,
    number_box,
)

ROWS, COLS = 6, 6
CELL_W = CELL_H = 8
STRIDE_X, STRIDE_Y = 14, 12
ANCHOR_X_MIN, ANCHOR_X_MAX = 10, 60
INVASION_Y = 80
DRIFT_PERIOD = 4
DESCEND = 4

PLAYER_Y, PLAYER_W, PLAYER_H = 190, 8, 8
PLAYER_X_MAX = 152
PM_W, PM_H = 1, 8
PM_SPAWN_Y = 182
EM_W, EM_H = 2, 8
MISSILE_SPEED = 4
SHIELD_Y, SHIELD_H = 172, 8
SHIELD_ANCHORS = (28, 76, 124)
EXPLOSION_TICKS = 6
EM_SPAWN_CHANCE = (1, 24)

LIVES_POS = (8, 4)
SCORE_POS = (108, 4)

_BG, _ALIEN_C, _PLAYER_C, _PM_C, _EM_C, _SHIELD_C, _SCORE_C, _LIVES_C = range(8)

PALETTE = Palette("invaders", (
    (0, 0, 0),
    (134, 134, 29),
    (50, 132, 50),
    (236, 236, 236),
    (200, 72, 72),
    (181, 83, 40),
    (117, 181, 239),
    (162, 134, 56),
))


def _alien_box(ax: int, ay: int, row: int, col: int) -> tuple[int, int, int, int]:
    return (ax + STRIDE_X * col, ay + STRIDE_Y * row, CELL_W, CELL_H)


class InvadersCartridge(Cartridge):
    id = "invaders"
    actions = ("NOOP", "LEFT", "RIGHT", "FIRE")
    palette = PALETTE

    categories = (
        CategoryDef("Alien", max_instances=ROWS * COLS),
        CategoryDef("Player"),
        CategoryDef("PlayerMissile"),
        CategoryDef("EnemyMissile"),
        CategoryDef("Shield", max_instances=3),
        CategoryDef("Lives", hud=True),
        CategoryDef("Score", hud=True),
    )

    quirks = (
        Quirk("missile_blink", "blink", "PlayerMissile", params=(2,)),
        Quirk("missile_size_jitter", "size_jitter", "PlayerMissile", params=(2, 8)),
        Quirk("explosion_particles", "particle", params=(EXPLOSION_TICKS,)),
    )

    decoder_spec = DecoderSpec("invaders", (
        BitmapGridEntry("Alien", CELL_W, CELL_H, PALETTE[_ALIEN_C],
                        bitmap_bytes=tuple(range(ROWS)), cols=COLS,
                        anchor_x_byte=13, anchor_y_byte=14,
                        stride_x=STRIDE_X, stride_y=STRIDE_Y),
        DirectEntry("Player", PLAYER_W, PLAYER_H, PALETTE[_PLAYER_C],
                    x_byte=6, y_const=PLAYER_Y),
        DirectEntry("PlayerMissile", PM_W, PM_H, PALETTE[_PM_C],
                    x_byte=7, y_byte=8, presence=Presence("flag", 9, 0)),
        DirectEntry("EnemyMissile", EM_W, EM_H, PALETTE[_EM_C],
                    x_byte=10, y_byte=11, presence=Presence("nonzero", 12)),
        DirectEntry("Shield", 0, SHIELD_H, PALETTE[_SHIELD_C],
                    x_const=SHIELD_ANCHORS[0], y_const=SHIELD_Y, w_byte=15, w_scale=4,
                    presence=Presence("nonzero", 15)),
        DirectEntry("Shield", 0, SHIELD_H, PALETTE[_SHIELD_C],
                    x_const=SHIELD_ANCHORS[1], y_const=SHIELD_Y, w_byte=16, w_scale=4,
                    presence=Presence("nonzero", 16)),
        DirectEntry("Shield", 0, SHIELD_H, PALETTE[_SHIELD_C],
                    x_const=SHIELD_ANCHORS[2], y_const=SHIELD_Y, w_byte=17, w_scale=4,
                    presence=Presence("nonzero", 17)),
        DirectEntry("Lives", *number_box(*LIVES_POS, 1)[2:], PALETTE[_LIVES_C],
                    x_const=LIVES_POS[0], y_const=LIVES_POS[1], hud=True,
                    value=ValueRule((21,), (1,))),
        DirectEntry("Score", *number_box(*SCORE_POS, 4)[2:], PALETTE[_SCORE_C],
                    x_const=SCORE_POS[0], y_const=SCORE_POS[1], hud=True,
                    value=ValueRule((22, 23), (1, 256))),
    ))

    vision_spec = VisionSpec("invaders", (
        VisionRule("Score", frozenset({_SCORE_C}), Region(0, 0, 160, 20),
                   hud=True, merge=True),
        VisionRule("Lives", frozenset({_LIVES_C}), Region(0, 0, 160, 20),
                   hud=True, merge=True),
        VisionRule("Alien", frozenset({_ALIEN_C}), Region(0, 24, 160, 170),
                   min_size=(2, 2), max_size=(CELL_W, CELL_H)),
        VisionRule("Player", frozenset({_PLAYER_C}), Region(0, 170, 160, 210)),
        VisionRule("PlayerMissile", frozenset({_PM_C}), Region(0, 24, 160, 192)),
        VisionRule("EnemyMissile", frozenset({_EM_C}), Region(0, 24, 160, 210)),
        VisionRule("Shield", frozenset({_SHIELD_C}), Region(0, 170, 160, 192)),
    ))

    def init_ram(self) -> bytearray:
        ram = bytearray(128)
        for i in range(ROWS):
            ram[i] = 0b00111111
        ram[6] = 76
        ram[13], ram[14] = 20, 40
        ram[15] = ram[16] = ram[17] = 4
        ram[21] = 3
        return ram

    def step(self, ram: bytearray, action: int, rng: Xorshift64) -> StepResult:
        reward, terminated = 0, False

        # explosion particle countdown
        if ram[18] > 0:
            ram[18] -= 1
            if ram[18] == 0:
                ram[19] = ram[20] = 0

        # alien grid drift: 1 px every DRIFT_PERIOD ticks, reverse + descend at bounds
        ram[25] = (ram[25] + 1) % DRIFT_PERIOD
        if ram[25] == 0:
            dx = -1 if ram[24] else 1
            nx = ram[13] + dx
            if nx < ANCHOR_X_MIN or nx > ANCHOR_X_MAX:
                ram[24] ^= 1
                ram[14] += DESCEND
                if ram[14] >= INVASION_Y:
                    terminated = True
            else:
                ram[13] = nx

        # player ship
        if action == 1:
            ram[6] = max(0, ram[6] - 2)
        elif action == 2:
            ram[6] = min(PLAYER_X_MAX, ram[6] + 2)
        elif action == 3 and not ram[9] & 1:
            ram[7] = ram[6] + PLAYER_W // 2
            ram[8] = PM_SPAWN_Y
            ram[9] = 1 | (rng.randint(0, 1) << 1)

        # player missile
        if ram[9] & 1:
            old_y = ram[8]
            ny = old_y - MISSILE_SPEED
            if ny < 24:
                ram[9] = 0
            else:
                ram[8] = ny
                hit = self._alien_hit(ram, ram[7], ny, PM_W, PM_H)
                if hit is not None:
                    row, col = hit
                    ram[row] &= ~(1 << col) & 0xFF
                    reward += 1
                    self._bump_score(ram)
                    bx, by, _, _ = _alien_box(ram[13], ram[14], row, col)
                    ram[18], ram[19], ram[20] = EXPLOSION_TICKS, bx, by
                    ram[9] = 0
                    if not any(ram[i] for i in range(ROWS)):
                        terminated = True  # grid cleared
                else:
                    si = self._shield_hit(ram, ram[7], ny, PM_W, PM_H)
                    if si is not None:
                        ram[15 + si] -= 1
                        ram[9] = 0

        # enemy missile
        if ram[12]:
            old_y = ram[11]
            ny = old_y + MISSILE_SPEED
            if ny >= 200:
                ram[12] = 0
            else:
                ram[11] = ny
                si = self._shield_hit(ram, ram[10], ny, EM_W, EM_H)
                if si is not None:
                    ram[15 + si] -= 1
                    ram[12] = 0
                elif boxes_overlap((ram[10], ny, EM_W, EM_H),
                                   (ram[6], PLAYER_Y, PLAYER_W, PLAYER_H)):
                    ram[12] = 0
                    ram[21] -= 1
                    if ram[21] == 0:
                        terminated = True
        else:
            if rng.chance(*EM_SPAWN_CHANCE):
                cols = [c for c in range(COLS) if any(ram[r] >> c & 1 for r in range(ROWS))]
                if cols:
                    col = cols[rng.randint(0, len(cols) - 1)]
                    row = max(r for r in range(ROWS) if ram[r] >> col & 1)
                    bx, by, _, _ = _alien_box(ram[13], ram[14], row, col)
                    ram[10] = bx + CELL_W // 2 - EM_W // 2
                    ram[11] = by + CELL_H + 1
                    ram[12] = 1

        # missiles crossing each other annihilate both
        if ram[9] & 1 and ram[12]:
            x_touch = ram[7] < ram[10] + EM_W and ram[10] < ram[7] + PM_W
            y_touch = ram[8] < ram[11] + EM_H and ram[11] < ram[8] + PM_H
            if x_touch and y_touch:
                ram[9] = 0
                ram[12] = 0

        return StepResult(reward, terminated, False)

    @staticmethod
    def _bump_score(ram: bytearray) -> None:
        if ram[22] == 255:
            ram[22] = 0
            ram[23] += 1
        else:
            ram[22] += 1

    @staticmethod
    def _alien_hit(ram: bytearray, x: int, y: int, w: int, h: int):
        ax, ay = ram[13], ram[14]
        for row in range(ROWS):
            bits = ram[row]
            if not bits:
                continue
            for col in range(COLS):
                if bits >> col & 1 and boxes_overlap((x, y, w, h), _alien_box(ax, ay, row, col)):
                    return (row, col)
        return None

    @staticmethod
    def _shield_hit(ram: bytearray, x: int, y: int, w: int, h: int):
        for i, anchor in enumerate(SHIELD_ANCHORS):
            hp = ram[15 + i]
            if hp and boxes_overlap((x, y, w, h), (anchor, SHIELD_Y, 4 * hp, SHIELD_H)):
                return i
        return None

    def draw_quirk_values(self, rng: Xorshift64) -> tuple[int, ...]:
        return (rng.randint(2, 8),)  # player missile rendered height this tick

    def draw(self, canvas, ram, frame_counter, quirk_draws, quirks):
        events: list[QuirkEvent] = []
        canvas[:] = _BG
        draw_number(canvas, ram[21], 1, *LIVES_POS, _LIVES_C)
        draw_number(canvas, ram[22] + 256 * ram[23], 4, *SCORE_POS, _SCORE_C)

        for i, anchor in enumerate(SHIELD_ANCHORS):
            if ram[15 + i]:
                draw_rect(canvas, anchor, SHIELD_Y, 4 * ram[15 + i], SHIELD_H, _SHIELD_C)

        ax, ay = ram[13], ram[14]
        for row in range(ROWS):
            for col in range(COLS):
                if ram[row] >> col & 1:
                    draw_rect(canvas, *_alien_box(ax, ay, row, col), _ALIEN_C)

        if ram[18] > 0 and "explosion_particles" in quirks:
            draw_rect(canvas, ram[19], ram[20], CELL_W, CELL_H, _ALIEN_C)
            events.append(QuirkEvent("particle", "Alien", (ram[19], ram[20], CELL_W, CELL_H)))

        if ram[12]:
            draw_rect(canvas, ram[10], ram[11], EM_W, EM_H, _EM_C)

        if ram[9] & 1:
            blink_hidden = ("missile_blink" in quirks
                            and (ram[9] >> 1 & 1) != (frame_counter & 1))
            if blink_hidden:
                events.append(QuirkEvent("blink", "PlayerMissile",
                                         (ram[7], ram[8], PM_W, PM_H)))
            else:
                h = quirk_draws[0] if "missile_size_jitter" in quirks else PM_H
                if h != PM_H:
                    events.append(QuirkEvent("size_jitter", "PlayerMissile",
                                             (ram[7], ram[8], PM_W, h)))
                draw_rect(canvas, ram[7], ram[8], PM_W, h, _PM_C)

        draw_rect(canvas, ram[6], PLAYER_Y, PLAYER_W, PLAYER_H, _PLAYER_C)
        return events

    def ground_truth(self, ram: bytes) -> tuple[GameObject, ...]:
        objs: list = []
        ax, ay = ram[13], ram[14]
        for row in range(ROWS):
            for col in range(COLS):
                if ram[row] >> col & 1:
                    objs.append(clipped_object("Alien", *_alien_box(ax, ay, row, col),
                                               PALETTE[_ALIEN_C]))
        objs.append(clipped_object("Player", ram[6], PLAYER_Y, PLAYER_W, PLAYER_H,
                                   PALETTE[_PLAYER_C]))
        if ram[9] & 1:
            objs.append(clipped_object("PlayerMissile", ram[7], ram[8], PM_W, PM_H,
                                       PALETTE[_PM_C]))
        if ram[12]:
            objs.append(clipped_object("EnemyMissile", ram[10], ram[11], EM_W, EM_H,
                                       PALETTE[_EM_C]))
        for i, anchor in enumerate(SHIELD_ANCHORS):
            if ram[15 + i]:
                objs.append(clipped_object("Shield", anchor, SHIELD_Y, 4 * ram[15 + i],
                                           SHIELD_H, PALETTE[_SHIELD_C]))
        objs.append(GameObject("Lives", *number_box(*LIVES_POS, 1), PALETTE[_LIVES_C],
                               hud=True, value=ram[21]))
        objs.append(GameObject("Score", *number_box(*SCORE_POS, 4), PALETTE[_SCORE_C],
                               hud=True, value=ram[22] + 256 * ram[23]))
        return tuple(o for o in objs if o is not None)

    def affine_truth(self) -> tuple[AffinePair, ...]:
        return (
            AffinePair(6, "Player", "x", 1.0, 0.0),
            AffinePair(7, "PlayerMissile", "x", 1.0, 0.0),
            AffinePair(8, "PlayerMissile", "y", 1.0, 0.0),
            AffinePair(10, "EnemyMissile", "x", 1.0, 0.0),
            AffinePair(11, "EnemyMissile", "y", 1.0, 0.0),
        )

    def render_affecting_bytes(self, ram: bytes, frame_counter: int = 0) -> frozenset[int]:
        affecting = {6, 9, 12, 18, 21, 22, 23}
        affecting.update(range(ROWS))  # bitmap rows: 0 hides aliens, 255 restores them
        if any(ram[r] for r in range(ROWS)):
            affecting.update({13, 14})  # anchors only matter while aliens live
        affecting.update(15 + i for i in range(3))
        if ram[9] & 1 and (ram[9] >> 1 & 1) == (frame_counter & 1):
            affecting.update({7, 8})  # missile position only visible on its blink parity
        if ram[12]:
            affecting.update({10, 11})
        if ram[18]:
            affecting.update({19, 20})
        return frozenset(affecting)
