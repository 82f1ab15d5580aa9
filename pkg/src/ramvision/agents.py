"""Rollout policies: a uniform random agent and per-game scripted heuristics.

Agents draw from their own RNG stream, never the console's, so interleaving
agent and environment code cannot perturb game evolution for a fixed action
sequence. Scripted policies are pure functions of the extracted object list.
"""

from __future__ import annotations

from typing import Optional, Protocol

from .games import get_cartridge
from .model import GameObject, ObjectList
from .rng import Xorshift64, derive_seed

AGENT_KINDS = ("random", "scripted")


class Agent(Protocol):
    kind: str

    def act(self, objects: ObjectList) -> int: ...


class RandomAgent:
    """Uniform over the bound game's action set."""

    kind = "random"

    def __init__(self, game_id: str, seed: int) -> None:
        self.n_actions = len(get_cartridge(game_id).actions)
        self.rng = Xorshift64(derive_seed(seed, 0xA6E27))

    def act(self, objects: ObjectList) -> int:
        return self.rng.randint(0, self.n_actions - 1)


def _first(objects: ObjectList, category: str) -> Optional[GameObject]:
    found = objects.by_category(category)
    return found[0] if found else None


class PaddlePolicy:
    """Chase the ball's vertical center with the player paddle."""

    def act(self, objects: ObjectList) -> int:
        ball = _first(objects, "Ball")
        player = _first(objects, "Player")
        if ball is None or player is None:
            return 0
        ball_cy = 2 * ball.y + ball.h
        paddle_cy = 2 * player.y + player.h
        if ball_cy < paddle_cy - 2:
            return 1  # UP
        if ball_cy > paddle_cy + 2:
            return 2  # DOWN
        return 0


class InvadersPolicy:
    """Slide under the nearest alien column and fire on alignment."""

    def act(self, objects: ObjectList) -> int:
        player = _first(objects, "Player")
        aliens = objects.by_category("Alien")
        if player is None or not aliens:
            return 0
        # target the lowest alien in the horizontally nearest column
        px = 2 * player.x + player.w
        target = min(aliens, key=lambda a: (abs(2 * a.x + a.w - px), -a.y))
        dx = (2 * target.x + target.w) - px
        if dx < -2:
            return 1  # LEFT
        if dx > 2:
            return 2  # RIGHT
        if _first(objects, "PlayerMissile") is None:
            return 3  # FIRE
        return 0


class ClimberPolicy:
    """Head for the current floor's ladder; jump over enemies on the way."""

    LADDERS = (120, 20, 76)
    ANCHORS = (188, 128, 68)

    def act(self, objects: ObjectList) -> int:
        player = _first(objects, "Player")
        if player is None:
            return 0
        floor = min(range(3), key=lambda f: abs((player.y + player.h) - self.ANCHORS[f]))
        target_x = self.LADDERS[floor]

        # small detour for a fruit on this floor
        fruit = _first(objects, "Fruit")
        if fruit is not None and abs((fruit.y + fruit.h + 10) - self.ANCHORS[floor]) <= 2:
            target_x = fruit.x - 2

        dx = target_x - player.x
        grounded = player.y + player.h == self.ANCHORS[floor]
        step = 0 if abs(dx) <= 1 else (2 if dx > 0 else 1)

        # hop when walking into an enemy on this floor
        if grounded and step:
            for enemy in objects.by_category("Enemy"):
                if abs((enemy.y + enemy.h) - self.ANCHORS[floor]) > 2:
                    continue
                ahead = enemy.x - player.x if step == 2 else player.x - enemy.x
                if 0 <= ahead <= 14:
                    return 3  # UP (jump clears the patrol)
        if step:
            return step
        return 3 if grounded else 0  # at the ladder: climb


class ScriptedAgent:
    """Deterministic per-game heuristic, strong enough to make progress."""

    kind = "scripted"

    _POLICIES = {
        "paddle": PaddlePolicy,
        "invaders": InvadersPolicy,
        "climber": ClimberPolicy,
    }

    def __init__(self, game_id: str, seed: int = 0) -> None:
        get_cartridge(game_id)  # validates the id
        self.policy = self._POLICIES[game_id]()

    def act(self, objects: ObjectList) -> int:
        return self.policy.act(objects)


def make_agent(kind: str, game_id: str, seed: int) -> Agent:
    if kind == "random":
        return RandomAgent(game_id, seed)
    if kind == "scripted":
        return ScriptedAgent(game_id, seed)
    raise ValueError(f"unknown agent kind {kind!r}; choose from {AGENT_KINDS}")
