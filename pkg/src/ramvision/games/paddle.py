"""Paddle: two paddles and a ball, direct-coordinate RAM with a render offset.

RAM map (normative):
  ram[0]  ball x in [4, 154]
  ram[1]  ball y in [24, 200]
  ram[2]  player paddle raw y (rendered top = raw + 10)
  ram[3]  enemy paddle raw y (rendered top = raw + 10)
  ram[4]  player score 0..20
  ram[5]  enemy score 0..20
  ram[6]  freeze countdown (set to 30 on every point)
  ram[7]  ball velocity, packed: bits 0-3 |dx| in {1,2}, bit 4 dx negative,
          bit 5 dy negative, bits 6-7 |dy| in {0..2}
"""

from __future__ import annotations

import numpy as np

from ..model import GameObject, Palette
from ..rem import DecoderSpec, DirectEntry, Presence, ValueRule
from ..rng import Xorshift64
from ..vem import Region, VisionRule, VisionSpec
from .base import (
    AffinePair,
    Cartridge,
    CategoryDef,
    Quirk,
    QuirkEvent,
    StepResult,
    clipped_object,
    draw_number,
    draw_rect,
    number_box,
)

PLAYER_X, ENEMY_X = 140, 16
PADDLE_W, PADDLE_H = 4, 16
BALL_W, BALL_H = 2, 4
Y_OFFSET = 10  # rendered paddle top = raw byte + 10
RAW_MIN, RAW_MAX = 14, 174  # keeps rendered paddles inside [24, 200]
BALL_Y_MIN, BALL_Y_MAX = 24, 200
BALL_X_MIN, BALL_X_MAX = 4, 154
FREEZE_TICKS = 30
WIN_SCORE = 20
PADDLE_SPEED = 2

PSCORE_POS = (96, 4)
ESCORE_POS = (48, 4)

_BG, _PLAYER_C, _ENEMY_C, _BALL_C = 0, 1, 2, 3

PALETTE = Palette("paddle", (
    (0, 0, 0),
    (92, 186, 92),
    (213, 130, 74),
    (236, 236, 236),
))


def pack_velocity(dx: int, dy: int) -> int:
    return (abs(dx) | (dx < 0) << 4 | (dy < 0) << 5 | abs(dy) << 6)


def unpack_velocity(byte: int) -> tuple[int, int]:
    dx = byte & 0x0F
    if byte >> 4 & 1:
        dx = -dx
    dy = byte >> 6 & 0x03
    if byte >> 5 & 1:
        dy = -dy
    return dx, dy


class PaddleCartridge(Cartridge):
    id = "paddle"
    actions = ("NOOP", "UP", "DOWN")
    palette = PALETTE
    freeze_addr = 6

    categories = (
        CategoryDef("Player"),
        CategoryDef("Enemy"),
        CategoryDef("Ball"),
        CategoryDef("PlayerScore", hud=True),
        CategoryDef("EnemyScore", hud=True),
    )

    quirks = (
        Quirk("paddle_offset", "render_offset", params=(Y_OFFSET,)),
        Quirk("freeze_replay", "freeze", params=(FREEZE_TICKS,)),
    )

    decoder_spec = DecoderSpec("paddle", (
        DirectEntry("Player", PADDLE_W, PADDLE_H, PALETTE[_PLAYER_C],
                    x_const=PLAYER_X, y_byte=2, y_add=Y_OFFSET),
        DirectEntry("Enemy", PADDLE_W, PADDLE_H, PALETTE[_ENEMY_C],
                    x_const=ENEMY_X, y_byte=3, y_add=Y_OFFSET),
        DirectEntry("Ball", BALL_W, BALL_H, PALETTE[_BALL_C], x_byte=0, y_byte=1),
        DirectEntry("PlayerScore", *number_box(*PSCORE_POS, 2)[2:], PALETTE[_PLAYER_C],
                    x_const=PSCORE_POS[0], y_const=PSCORE_POS[1], hud=True,
                    value=ValueRule((4,), (1,))),
        DirectEntry("EnemyScore", *number_box(*ESCORE_POS, 2)[2:], PALETTE[_ENEMY_C],
                    x_const=ESCORE_POS[0], y_const=ESCORE_POS[1], hud=True,
                    value=ValueRule((5,), (1,))),
    ))

    vision_spec = VisionSpec("paddle", (
        VisionRule("PlayerScore", frozenset({_PLAYER_C}), Region(0, 0, 160, 20),
                   hud=True, merge=True),
        VisionRule("EnemyScore", frozenset({_ENEMY_C}), Region(0, 0, 160, 20),
                   hud=True, merge=True),
        VisionRule("Player", frozenset({_PLAYER_C}), Region(0, 24, 160, 210),
                   min_size=(2, 4)),
        VisionRule("Enemy", frozenset({_ENEMY_C}), Region(0, 24, 160, 210),
                   min_size=(2, 4)),
        VisionRule("Ball", frozenset({_BALL_C}), Region(0, 20, 160, 210),
                   max_size=(4, 8)),
    ))

    def init_ram(self) -> bytearray:
        ram = bytearray(128)
        ram[0], ram[1] = 80, 112
        ram[2] = ram[3] = 94
        ram[7] = pack_velocity(1, 1)
        return ram

    def step(self, ram: bytearray, action: int, rng: Xorshift64) -> StepResult:
        # player paddle
        if action == 1:
            ram[2] = max(RAW_MIN, ram[2] - PADDLE_SPEED)
        elif action == 2:
            ram[2] = min(RAW_MAX, ram[2] + PADDLE_SPEED)

        # enemy paddle: proportional tracker with a jittered dead zone and a
        # lazy tick so a well-played ball can get past it (draws happen every
        # tick to keep the RAM trace independent of outcomes)
        dead = 4 + rng.randint(0, 9)
        lazy = rng.chance(1, 4)
        ball_cy = ram[1] + BALL_H // 2
        enemy_cy = ram[3] + Y_OFFSET + PADDLE_H // 2
        if not lazy:
            if ball_cy > enemy_cy + dead:
                ram[3] = min(RAW_MAX, ram[3] + PADDLE_SPEED)
            elif ball_cy < enemy_cy - dead:
                ram[3] = max(RAW_MIN, ram[3] - PADDLE_SPEED)

        # ball
        dx, dy = unpack_velocity(ram[7])
        nx, ny = ram[0] + dx, ram[1] + dy
        if ny < BALL_Y_MIN:
            ny = 2 * BALL_Y_MIN - ny
            dy = -dy
        elif ny > BALL_Y_MAX:
            ny = 2 * BALL_Y_MAX - ny
            dy = -dy

        player_top, enemy_top = ram[2] + Y_OFFSET, ram[3] + Y_OFFSET
        if dx > 0 and ram[0] + BALL_W <= PLAYER_X < nx + BALL_W:
            if ny < player_top + PADDLE_H and ny + BALL_H > player_top:
                nx = PLAYER_X - BALL_W
                dx, dy = self._rebound(-1, ny, player_top)
        elif dx < 0 and ram[0] >= ENEMY_X + PADDLE_W > nx:
            if ny < enemy_top + PADDLE_H and ny + BALL_H > enemy_top:
                nx = ENEMY_X + PADDLE_W
                dx, dy = self._rebound(1, ny, enemy_top)

        reward, freeze = 0, False
        if nx < BALL_X_MIN:  # past the enemy: player point
            reward = 1
            ram[4] += 1
            freeze = True
        elif nx > BALL_X_MAX:  # past the player: enemy point
            reward = -1
            ram[5] += 1
            freeze = True

        if freeze:
            ram[6] = FREEZE_TICKS
            ram[0], ram[1] = 80, 112
            serve_dx = rng.randint(1, 2) * (1 if reward < 0 else -1)
            serve_dy = rng.randint(0, 2) * (1 if rng.chance(1, 2) else -1)
            ram[7] = pack_velocity(serve_dx, serve_dy)
        else:
            ram[0], ram[1] = nx, ny
            ram[7] = pack_velocity(dx, dy)

        return StepResult(reward, ram[4] >= WIN_SCORE or ram[5] >= WIN_SCORE, freeze)

    @staticmethod
    def _rebound(direction: int, ball_y: int, paddle_top: int) -> tuple[int, int]:
        """Outgoing velocity after a paddle hit; angle depends on contact point."""
        delta = (ball_y + BALL_H // 2) - (paddle_top + PADDLE_H // 2)
        speed = 2 if abs(delta) >= 6 else 1
        dy = 0 if abs(delta) <= 1 else (2 if abs(delta) >= 5 else 1) * (1 if delta > 0 else -1)
        return direction * speed, dy

    def draw(self, canvas, ram, frame_counter, quirk_draws, quirks):
        canvas[:] = _BG
        draw_number(canvas, ram[4], 2, *PSCORE_POS, _PLAYER_C)
        draw_number(canvas, ram[5], 2, *ESCORE_POS, _ENEMY_C)
        draw_rect(canvas, PLAYER_X, ram[2] + Y_OFFSET, PADDLE_W, PADDLE_H, _PLAYER_C)
        draw_rect(canvas, ENEMY_X, ram[3] + Y_OFFSET, PADDLE_W, PADDLE_H, _ENEMY_C)
        draw_rect(canvas, ram[0], ram[1], BALL_W, BALL_H, _BALL_C)
        return []

    def ground_truth(self, ram: bytes) -> tuple[GameObject, ...]:
        objs = [
            clipped_object("Player", PLAYER_X, ram[2] + Y_OFFSET, PADDLE_W, PADDLE_H,
                           PALETTE[_PLAYER_C]),
            clipped_object("Enemy", ENEMY_X, ram[3] + Y_OFFSET, PADDLE_W, PADDLE_H,
                           PALETTE[_ENEMY_C]),
            clipped_object("Ball", ram[0], ram[1], BALL_W, BALL_H, PALETTE[_BALL_C]),
            GameObject("PlayerScore", *number_box(*PSCORE_POS, 2), PALETTE[_PLAYER_C],
                       hud=True, value=ram[4]),
            GameObject("EnemyScore", *number_box(*ESCORE_POS, 2), PALETTE[_ENEMY_C],
                       hud=True, value=ram[5]),
        ]
        return tuple(o for o in objs if o is not None)

    def affine_truth(self) -> tuple[AffinePair, ...]:
        return (
            AffinePair(0, "Ball", "x", 1.0, 0.0),
            AffinePair(1, "Ball", "y", 1.0, 0.0),
            AffinePair(2, "Player", "y", 1.0, float(Y_OFFSET)),
            AffinePair(3, "Enemy", "y", 1.0, float(Y_OFFSET)),
        )

    def render_affecting_bytes(self, ram: bytes, frame_counter: int = 0) -> frozenset[int]:
        # Valid outside freeze windows; during a replayed freeze no poke is
        # visible at all, so probing there is uninformative by design.
        return frozenset({0, 1, 2, 3, 4, 5})
