"""Climber: three floors with categorical y encoding (floor index + fine
offset), patrolling enemies encoded as flag+offset bytes, a blinking fruit
and a jump sprite-shrink quirk.

RAM map (normative):
  ram[0]   player x
  ram[1]   player floor in {0, 1, 2}
  ram[2]   player fine y in [0, 31]; player top y = floor_anchor[floor] - 16 - fine
  ram[3]   player flags: bit 0 jumping (rising), bit 1 falling
  ram[4..7) one enemy per floor: bit 7 active, bits 0-6 x offset (x = 8 + offset)
  ram[7]   fruit x
  ram[8]   fruit flags: bits 0-1 floor, bit 2 active, bit 3 blink phase
  ram[9]   lives (HUD)
  ram[10]  score (HUD)
  ram[11]  enemy patrol directions, bit f = enemy on floor f moving left
  ram[12]  fruit respawn countdown
"""

from __future__ import annotations

import numpy as np

from ..model import GameObject, Palette
from ..rem import CategoricalEntry, DecoderSpec, DirectEntry, Presence, ValueRule
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

FLOOR_ANCHORS = (188, 128, 68)  # y of each floor's walking surface, bottom to top
PLAYER_W, PLAYER_H = 8, 16
SHRUNK_H = 12  # rendered sprite height near the jump peak
SHRINK_THRESHOLD = 24  # fine y at which the jump sprite shrinks
JUMP_RISE, JUMP_MAX = 4, 31
ENEMY_W, ENEMY_H = 8, 8
ENEMY_X_ANCHOR = 8
ENEMY_OFFSET_MAX = 120
FRUIT_W, FRUIT_H = 4, 4
FRUIT_DY = 14  # fruit top = floor anchor - FRUIT_DY
FRUIT_RESPAWN = 150
PLAYER_X_MAX = 152
WALK_SPEED = 2
LADDERS = (120, 20, 76)  # ladder x per floor; the floor-2 ladder is the exit
LADDER_W = 4
EXIT_REWARD = 10

LIVES_POS = (20, 4)
SCORE_POS = (120, 4)

_BG, _PLATFORM_C, _LADDER_C, _PLAYER_C, _ENEMY_C, _FRUIT_C, _SCORE_C, _LIVES_C = range(8)

PALETTE = Palette("climber", (
    (0, 0, 0),
    (162, 98, 33),
    (204, 216, 110),
    (223, 183, 85),
    (227, 151, 89),
    (213, 56, 52),
    (160, 171, 79),
    (214, 214, 214),
))


def player_box(ram: bytes) -> tuple[int, int, int, int] | None:
    if ram[1] >= len(FLOOR_ANCHORS):  # pokeable, not reachable by dynamics
        return None
    return (ram[0], FLOOR_ANCHORS[ram[1]] - PLAYER_H - ram[2], PLAYER_W, PLAYER_H)


def enemy_box(ram: bytes, floor: int) -> tuple[int, int, int, int] | None:
    byte = ram[4 + floor]
    if not byte & 0x80:
        return None
    return (ENEMY_X_ANCHOR + (byte & 0x7F), FLOOR_ANCHORS[floor] - ENEMY_H, ENEMY_W, ENEMY_H)


def fruit_box(ram: bytes) -> tuple[int, int, int, int] | None:
    if not ram[8] & 0x04:
        return None
    floor = min(ram[8] & 0x03, 2)  # floor bits saturate at the top floor
    return (ram[7], FLOOR_ANCHORS[floor] - FRUIT_DY, FRUIT_W, FRUIT_H)


class ClimberCartridge(Cartridge):
    id = "climber"
    actions = ("NOOP", "LEFT", "RIGHT", "UP")
    palette = PALETTE

    categories = (
        CategoryDef("Player"),
        CategoryDef("Enemy", max_instances=3),
        CategoryDef("Fruit"),
        CategoryDef("Lives", hud=True),
        CategoryDef("Score", hud=True),
    )

    quirks = (
        Quirk("fruit_blink", "blink", "Fruit", params=(2,)),
        Quirk("jump_sprite_shrink", "sprite_shrink", "Player", params=(SHRINK_THRESHOLD,)),
    )

    decoder_spec = DecoderSpec("climber", (
        CategoricalEntry("Player", PLAYER_W, PLAYER_H, PALETTE[_PLAYER_C],
                         x_byte=0, index_byte=1, anchor_table=FLOOR_ANCHORS,
                         fine_byte=2, base_offset=-PLAYER_H),
        DirectEntry("Enemy", ENEMY_W, ENEMY_H, PALETTE[_ENEMY_C],
                    x_byte=4, x_mask=0x7F, x_add=ENEMY_X_ANCHOR,
                    y_const=FLOOR_ANCHORS[0] - ENEMY_H, presence=Presence("flag", 4, 7)),
        DirectEntry("Enemy", ENEMY_W, ENEMY_H, PALETTE[_ENEMY_C],
                    x_byte=5, x_mask=0x7F, x_add=ENEMY_X_ANCHOR,
                    y_const=FLOOR_ANCHORS[1] - ENEMY_H, presence=Presence("flag", 5, 7)),
        DirectEntry("Enemy", ENEMY_W, ENEMY_H, PALETTE[_ENEMY_C],
                    x_byte=6, x_mask=0x7F, x_add=ENEMY_X_ANCHOR,
                    y_const=FLOOR_ANCHORS[2] - ENEMY_H, presence=Presence("flag", 6, 7)),
        CategoricalEntry("Fruit", FRUIT_W, FRUIT_H, PALETTE[_FRUIT_C],
                         x_byte=7, index_byte=8, index_mask=0x03,
                         anchor_table=FLOOR_ANCHORS + (FLOOR_ANCHORS[2],),
                         fine_byte=None, base_offset=-FRUIT_DY,
                         presence=Presence("flag", 8, 2)),
        DirectEntry("Lives", *number_box(*LIVES_POS, 1)[2:], PALETTE[_LIVES_C],
                    x_const=LIVES_POS[0], y_const=LIVES_POS[1], hud=True,
                    value=ValueRule((9,), (1,))),
        DirectEntry("Score", *number_box(*SCORE_POS, 3)[2:], PALETTE[_SCORE_C],
                    x_const=SCORE_POS[0], y_const=SCORE_POS[1], hud=True,
                    value=ValueRule((10,), (1,))),
    ))

    vision_spec = VisionSpec("climber", (
        VisionRule("Score", frozenset({_SCORE_C}), Region(0, 0, 160, 20),
                   hud=True, merge=True),
        VisionRule("Lives", frozenset({_LIVES_C}), Region(0, 0, 160, 20),
                   hud=True, merge=True),
        VisionRule("Player", frozenset({_PLAYER_C}), Region(0, 20, 160, 210)),
        VisionRule("Enemy", frozenset({_ENEMY_C}), Region(0, 20, 160, 210)),
        VisionRule("Fruit", frozenset({_FRUIT_C}), Region(0, 20, 160, 210)),
    ))

    def init_ram(self) -> bytearray:
        ram = bytearray(128)
        ram[0] = 4
        ram[4] = 0x80 | 60
        ram[5] = 0x80 | 40
        ram[6] = 0x80 | 80
        ram[7] = 100
        ram[8] = 0x04 | 1  # active, floor 1, blink phase 0
        ram[9] = 3
        ram[12] = FRUIT_RESPAWN
        return ram

    def step(self, ram: bytearray, action: int, rng: Xorshift64) -> StepResult:
        reward, terminated = 0, False

        # horizontal movement (allowed while airborne)
        if action == 1:
            ram[0] = max(0, ram[0] - WALK_SPEED)
        elif action == 2:
            ram[0] = min(PLAYER_X_MAX, ram[0] + WALK_SPEED)

        # jump / climb
        grounded = ram[2] == 0 and not ram[3] & 0x03
        if action == 3 and grounded:
            ladder_x = LADDERS[ram[1]]
            if abs((ram[0] + PLAYER_W // 2) - (ladder_x + LADDER_W // 2)) <= 2:
                if ram[1] == 2:
                    reward += EXIT_REWARD
                    terminated = True
                else:
                    ram[1] += 1
            else:
                ram[3] |= 0x01  # start jump
        if ram[3] & 0x01:  # rising
            if ram[2] + JUMP_RISE >= JUMP_MAX:
                ram[2] = JUMP_MAX
                ram[3] = (ram[3] & ~0x01) | 0x02
            else:
                ram[2] += JUMP_RISE
        elif ram[3] & 0x02:  # falling
            if ram[2] <= JUMP_RISE:
                ram[2] = 0
                ram[3] &= ~0x02
            else:
                ram[2] -= JUMP_RISE

        # enemy patrol, 1 px/tick bouncing in offset range [0, ENEMY_OFFSET_MAX]
        for f in range(3):
            byte = ram[4 + f]
            if not byte & 0x80:
                continue
            offset = byte & 0x7F
            left = ram[11] >> f & 1
            offset += -1 if left else 1
            if offset <= 0:
                offset, left = 0, 0
            elif offset >= ENEMY_OFFSET_MAX:
                offset, left = ENEMY_OFFSET_MAX, 1
            ram[4 + f] = 0x80 | offset
            ram[11] = (ram[11] & ~(1 << f) | (left << f)) & 0xFF

        # fruit pickup / respawn clock
        pbox = player_box(ram)
        fbox = fruit_box(ram)
        if fbox is not None and (ram[8] & 0x03) == ram[1] and boxes_overlap(pbox, fbox):
            reward += 1
            ram[10] = min(255, ram[10] + 1)
            self._respawn_fruit(ram, rng)
        elif ram[12] <= 1:
            self._respawn_fruit(ram, rng)
        else:
            ram[12] -= 1

        # enemy contact costs a life and resets the player to the start
        ebox = enemy_box(ram, ram[1])
        if ebox is not None and boxes_overlap(player_box(ram), ebox):
            ram[9] -= 1
            ram[0], ram[1], ram[2], ram[3] = 4, 0, 0, 0
            if ram[9] == 0:
                terminated = True
            # the start corner must be clear when the player reappears there
            start = player_box(ram)
            floor0 = enemy_box(ram, 0)
            if floor0 is not None and boxes_overlap(start, floor0):
                ram[4] = 0x80 | (PLAYER_W + 4)  # shove past the corner
                ram[11] &= ~0x01  # and send it walking right
            fbox = fruit_box(ram)
            if fbox is not None and (ram[8] & 0x03) == 0 and boxes_overlap(start, fbox):
                reward += 1
                ram[10] = min(255, ram[10] + 1)
                self._respawn_fruit(ram, rng)

        return StepResult(reward, terminated, False)

    @staticmethod
    def _respawn_fruit(ram: bytearray, rng: Xorshift64) -> None:
        pbox = player_box(ram)
        while True:
            ram[7] = rng.randint(8, 140)
            ram[8] = (rng.randint(0, 2) | 0x04 | (rng.randint(0, 1) << 3)) & 0xFF
            # never drop the fruit on top of the player
            if pbox is None or not boxes_overlap(pbox, fruit_box(ram)):
                break
        ram[12] = FRUIT_RESPAWN

    def draw(self, canvas, ram, frame_counter, quirk_draws, quirks):
        events: list[QuirkEvent] = []
        canvas[:] = _BG
        draw_number(canvas, ram[9], 1, *LIVES_POS, _LIVES_C)
        draw_number(canvas, ram[10], 3, *SCORE_POS, _SCORE_C)

        for anchor in FLOOR_ANCHORS:
            draw_rect(canvas, 0, anchor, 160, 4, _PLATFORM_C)
        for f, lx in enumerate(LADDERS):
            top = FLOOR_ANCHORS[f + 1] + 4 if f < 2 else 20
            draw_rect(canvas, lx, top, LADDER_W, FLOOR_ANCHORS[f] - top, _LADDER_C)

        for f in range(3):
            box = enemy_box(ram, f)
            if box is not None:
                draw_rect(canvas, *box, _ENEMY_C)

        fbox = fruit_box(ram)
        if fbox is not None:
            blink_hidden = ("fruit_blink" in quirks
                            and (ram[8] >> 3 & 1) != (frame_counter & 1))
            if blink_hidden:
                events.append(QuirkEvent("blink", "Fruit", fbox))
            else:
                draw_rect(canvas, *fbox, _FRUIT_C)

        pbox = player_box(ram)
        if pbox is not None:
            px, py, pw, ph = pbox
            if ("jump_sprite_shrink" in quirks and ram[3] & 0x01
                    and ram[2] >= SHRINK_THRESHOLD):
                ph = SHRUNK_H
                events.append(QuirkEvent("sprite_shrink", "Player", (px, py, pw, ph)))
            draw_rect(canvas, px, py, pw, ph, _PLAYER_C)
        return events

    def ground_truth(self, ram: bytes) -> tuple[GameObject, ...]:
        pbox = player_box(ram)
        objs = [clipped_object("Player", *pbox, PALETTE[_PLAYER_C])] if pbox else []
        for f in range(3):
            box = enemy_box(ram, f)
            if box is not None:
                objs.append(clipped_object("Enemy", *box, PALETTE[_ENEMY_C]))
        fbox = fruit_box(ram)
        if fbox is not None:
            objs.append(clipped_object("Fruit", *fbox, PALETTE[_FRUIT_C]))
        objs.append(GameObject("Lives", *number_box(*LIVES_POS, 1), PALETTE[_LIVES_C],
                               hud=True, value=ram[9]))
        objs.append(GameObject("Score", *number_box(*SCORE_POS, 3), PALETTE[_SCORE_C],
                               hud=True, value=ram[10]))
        return tuple(o for o in objs if o is not None)

    def affine_truth(self) -> tuple[AffinePair, ...]:
        return (
            AffinePair(0, "Player", "x", 1.0, 0.0),
            AffinePair(7, "Fruit", "x", 1.0, 0.0),
        )

    def render_affecting_bytes(self, ram: bytes, frame_counter: int = 0) -> frozenset[int]:
        affecting = {0, 1, 2, 4, 5, 6, 9, 10}
        if ram[2] >= SHRINK_THRESHOLD:
            affecting.add(3)  # toggling the jump bit toggles the sprite shrink
        parity = frame_counter & 1
        fruit_shown = bool(ram[8] & 0x04) and (ram[8] >> 3 & 1) == parity
        if fruit_shown:
            affecting.update({7, 8})  # hiding or moving a visible fruit changes pixels
        elif parity == 1:
            affecting.add(8)  # 255 makes a phase-1 fruit appear on odd frames
        return frozenset(affecting)
