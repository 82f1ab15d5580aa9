"""Dataset generation and parsing: sequential frames with both extraction
views, HUD separated from game objects, reproducible from one seed.

Layout per output directory: one CSV per game, one PNG per frame under
frames/, and manifest.json recording the config, per-episode agents and
seeds, and a config hash. Object lists are serialized inside CSV cells as
semicolon-joined entries `category,x,y,w,h,r,g,b[,orientation][,value]`.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
from PIL import Image

from . import console as console_mod
from .agents import make_agent
from .model import GameObject, ObjectList, to_rgb
from .rem import extract_rem
from .rng import derive_seed
from .vem import extract_vem

# inline observation cells hold a full RGB frame as text
csv.field_size_limit(8 * 210 * 160 * 3)

INDEX_RE = re.compile(r"^\d{5}_\d{5}$")
HUD_BOTTOM = 20
CSV_FIELDS = ("index", "obs", "hud", "ram", "vis", "png")


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetRow:
    index: str
    obs: Optional[tuple[int, ...]]  # flattened row-major RGB triples
    hud: tuple[GameObject, ...]  # REM HUD objects
    ram: tuple[GameObject, ...]  # REM game objects
    vis: tuple[GameObject, ...]  # full VEM output
    png: str


def _serialize_objects(objects: Iterable[GameObject]) -> str:
    parts = []
    for o in objects:
        fields = [o.category, o.x, o.y, o.w, o.h, *o.rgb]
        if o.orientation is not None:
            fields.append(o.orientation)
        if o.value is not None:
            fields.append(o.value)
        parts.append(",".join(map(str, fields)))
    return ";".join(parts)


def _parse_objects(cell: str, index: str, column: str, hud: bool) -> tuple[GameObject, ...]:
    if not cell:
        return ()
    out = []
    for entry in cell.split(";"):
        fields = entry.split(",")
        if len(fields) < 8 or len(fields) > 10:
            raise DatasetError(f"row {index} column {column}: malformed entry {entry!r}")
        try:
            nums = list(map(int, fields[1:]))
        except ValueError:
            raise DatasetError(
                f"row {index} column {column}: non-integer field in {entry!r}") from None
        x, y, w, h, r, g, b = nums[:7]
        orientation = value = None
        if len(nums) == 9:
            orientation, value = nums[7], nums[8]
        elif len(nums) == 8:
            # single trailing field: none of the cartridges emit orientation,
            # so a lone extra is the displayed value
            value = nums[7]
        out.append(GameObject(fields[0], x, y, w, h, (r, g, b), hud=hud,
                              orientation=orientation, value=value))
    return tuple(out)


def _config_hash(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def agent_schedule(episodes: int, random_fraction: float) -> list[str]:
    """First ceil(fraction * episodes) episodes use the random agent."""
    n_random = math.ceil(random_fraction * episodes)
    return ["random"] * n_random + ["scripted"] * (episodes - n_random)


def generate(games: tuple[str, ...], episodes_per_game: int, frames_per_episode: int,
             random_fraction: float = 0.3, seed: int = 0,
             outdir: str | Path = "dataset", inline_obs: bool = False) -> dict:
    """Write CSVs, frame PNGs and a manifest; returns the manifest dict."""
    if not 0 <= random_fraction <= 1:
        raise ValueError("random_fraction must be in [0, 1]")
    out = Path(outdir)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "games": list(games),
        "episodes_per_game": episodes_per_game,
        "frames_per_episode": frames_per_episode,
        "random_fraction": random_fraction,
        "seed": seed,
        "inline_obs": inline_obs,
    }
    manifest: dict = {"config": config, "config_hash": _config_hash(config),
                      "games": {}}
    for gi, game_id in enumerate(games):
        schedule = agent_schedule(episodes_per_game, random_fraction)
        csv_path = out / f"{game_id}.csv"
        episodes_meta = []
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_FIELDS)
            for ep, agent_kind in enumerate(schedule, start=1):
                ep_seed = derive_seed(seed, gi * 100_000 + ep)
                episodes_meta.append(
                    {"episode": ep, "agent": agent_kind, "seed": ep_seed})
                _write_episode(writer, frames_dir, game_id, ep, agent_kind,
                               ep_seed, frames_per_episode, inline_obs)
        manifest["games"][game_id] = {"csv": csv_path.name,
                                      "episodes": episodes_meta}
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _write_episode(writer, frames_dir: Path, game_id: str, episode: int,
                   agent_kind: str, ep_seed: int, frames: int,
                   inline_obs: bool) -> None:
    con = console_mod.create(game_id, ep_seed)
    agent = make_agent(agent_kind, game_id, ep_seed)
    restarts = 0
    for f in range(1, frames + 1):
        if con.terminated:
            restarts += 1
            con = console_mod.create(game_id, derive_seed(ep_seed, restarts))
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec, con.frame_counter)
        con.tick(agent.act(rem))
        frame = con.render()
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec, con.frame_counter)
        vem = extract_vem(frame, con.cartridge.vision_spec, con.cartridge.palette,
                          con.frame_counter)
        rgb = to_rgb(frame, con.cartridge.palette)
        index = f"{episode:05d}_{f:05d}"
        png_name = f"{game_id}_{index}.png"
        Image.fromarray(rgb).save(frames_dir / png_name)
        obs_cell = " ".join(map(str, rgb.reshape(-1))) if inline_obs else ""
        writer.writerow([
            index,
            obs_cell,
            _serialize_objects(o for o in rem if o.hud),
            _serialize_objects(o for o in rem if not o.hud),
            _serialize_objects(vem),
            f"frames/{png_name}",
        ])


def parse(path: str | Path) -> list[DatasetRow]:
    """Read one game CSV back into rows; strict about format and ordering."""
    rows: list[DatasetRow] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(CSV_FIELDS):
            raise DatasetError(f"{path}: unexpected header {header}")
        prev_index = ""
        for line in reader:
            if len(line) != len(CSV_FIELDS):
                where = line[0] if line else "<empty>"
                raise DatasetError(f"row {where}: expected {len(CSV_FIELDS)} columns, "
                                   f"got {len(line)}")
            index, obs_cell, hud_cell, ram_cell, vis_cell, png = line
            if not INDEX_RE.match(index):
                raise DatasetError(f"row {index!r}: bad index format")
            if index <= prev_index:
                raise DatasetError(f"row {index}: indices must strictly increase")
            prev_index = index
            obs = tuple(map(int, obs_cell.split())) if obs_cell else None
            hud = _parse_objects(hud_cell, index, "hud", hud=True)
            ram = _parse_objects(ram_cell, index, "ram", hud=False)
            # VEM HUD rules only fire above the HUD line, game rules below it
            vis = tuple(
                GameObject(o.category, o.x, o.y, o.w, o.h, o.rgb,
                           hud=o.y + o.h <= HUD_BOTTOM,
                           orientation=o.orientation, value=o.value)
                for o in _parse_objects(vis_cell, index, "vis", hud=False)
            )
            rows.append(DatasetRow(index, obs, hud, ram, vis, png))
    return rows
