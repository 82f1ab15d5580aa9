"""Command-line entry point: eval, bench, dataset, discover, play, serve."""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import console as console_mod
from .agents import make_agent
from .discovery import collect_traces, correlate, probe_sweep, score_discovery
from .evalkit import bench_speed, format_report, run_comparison
from .games import GAME_IDS
from .model import to_rgb
from .rem import extract_rem
from .vem import extract_vem

GAME_CHOICE = click.Choice(GAME_IDS)
AGENT_CHOICE = click.Choice(("random", "scripted"))


def _announce(**config) -> None:
    digest = hashlib.sha256(
        json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]
    click.echo(f"seed {config.get('seed')}  config {digest}")


@click.group()
def main() -> None:
    """Object extraction toolkit for the built-in mini-console cartridges."""


@main.command("eval")
@click.option("--game", "game_id", type=GAME_CHOICE, required=True)
@click.option("--agent", type=AGENT_CHOICE, default="random", show_default=True)
@click.option("--frames", type=click.IntRange(1), default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--no-quirks", is_flag=True, help="Disable all render quirks.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the machine-readable report here.")
def eval_cmd(game_id: str, agent: str, frames: int, seed: int,
             no_quirks: bool, out: str | None) -> None:
    """Compare REM against VEM over a rollout and report detection metrics."""
    _announce(command="eval", game=game_id, agent=agent, frames=frames,
              seed=seed, no_quirks=no_quirks)
    report = run_comparison(game_id, agent, frames, seed, quirks=not no_quirks)
    click.echo(format_report(report))
    path = Path(out) if out else Path(f"eval_{game_id}_{agent}.json")
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    click.echo(f"report written to {path}")


@main.command("bench")
@click.option("--game", "game_id", type=GAME_CHOICE, required=True)
@click.option("--steps", type=click.IntRange(1), default=10_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def bench_cmd(game_id: str, steps: int, seed: int) -> None:
    """Time REM-only vs VEM-only extraction over identical rollouts."""
    _announce(command="bench", game=game_id, steps=steps, seed=seed)
    result = bench_speed(game_id, steps, seed)
    click.echo(f"t_rem {result.t_rem:.3f} s  t_vem {result.t_vem:.3f} s  "
               f"ratio {result.ratio:.1f}")


@main.command("dataset")
@click.option("--out", "outdir", type=click.Path(file_okay=False), required=True)
@click.option("--games", default=",".join(GAME_IDS), show_default=True,
              help="Comma-separated game ids.")
@click.option("--episodes", type=click.IntRange(0), default=10, show_default=True)
@click.option("--frames", type=click.IntRange(1), default=100, show_default=True)
@click.option("--mix", type=click.FloatRange(0, 1), default=0.3, show_default=True,
              help="Fraction of episodes played by the random agent.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--inline-obs", is_flag=True, help="Inline RGB pixels into the CSV.")
def dataset_cmd(outdir: str, games: str, episodes: int, frames: int,
                mix: float, seed: int, inline_obs: bool) -> None:
    """Generate a sequential-frame dataset with REM/VEM object annotations."""
    from .oda import generate
    game_list = tuple(g.strip() for g in games.split(",") if g.strip())
    for g in game_list:
        if g not in GAME_IDS:
            raise click.BadParameter(f"unknown game {g!r}", param_hint="--games")
    _announce(command="dataset", games=list(game_list), episodes=episodes,
              frames=frames, mix=mix, seed=seed, inline_obs=inline_obs)
    manifest = generate(game_list, episodes, frames, mix, seed, outdir, inline_obs)
    click.echo(f"wrote {len(manifest['games'])} game(s) to {outdir} "
               f"(manifest hash {manifest['config_hash']})")


@main.command("discover")
@click.option("--game", "game_id", type=GAME_CHOICE, required=True)
@click.option("--frames", type=click.IntRange(2), default=500, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--agent", type=AGENT_CHOICE, default="scripted", show_default=True)
@click.option("--probe", is_flag=True, help="Also run the 128-byte probe sweep.")
def discover_cmd(game_id: str, frames: int, seed: int, agent: str,
                 probe: bool) -> None:
    """Correlate RAM bytes against observed object properties."""
    _announce(command="discover", game=game_id, frames=frames, seed=seed,
              agent=agent, probe=probe)
    traces = collect_traces(game_id, agent, frames, seed)
    findings = correlate(traces)
    for f in findings:
        click.echo(f"byte {f.byte:3d}  {f.category}.{f.prop:<8s} r={f.r:+.4f}  "
                   f"fit a={f.a:g} b={f.b:g}  residual={f.residual:.4f}  "
                   f"support={f.support}{'  (consensus)' if f.consensus else ''}")
    report = score_discovery(game_id, findings)
    click.echo(f"recovery {report.recovery:.2%} "
               f"({len(report.recovered)}/{report.total_pairs}), "
               f"false findings {report.false_findings}")
    if probe:
        con = console_mod.create(game_id, seed)
        for _ in range(40):
            con.tick(0)
        flagged = sorted(p.byte for p in probe_sweep(con) if p.render_affecting)
        click.echo(f"render-affecting bytes: {flagged}")
    if report.recovery < 0.9:
        sys.exit(1)


def _draw_overlay(rgb: np.ndarray, objects, color, dashed: bool) -> None:
    for o in objects:
        x0, y0, x1, y1 = o.x, o.y, o.x + o.w - 1, o.y + o.h - 1
        for i, x in enumerate(range(x0, x1 + 1)):
            if dashed and i % 4 >= 2:
                continue
            rgb[y0, x] = color
            rgb[y1, x] = color
        for i, y in enumerate(range(y0, y1 + 1)):
            if dashed and i % 4 >= 2:
                continue
            rgb[y, x0] = color
            rgb[y, x1] = color


@main.command("play")
@click.option("--game", "game_id", type=GAME_CHOICE, required=True)
@click.option("--agent", type=AGENT_CHOICE, default="scripted", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--frames", type=click.IntRange(1), default=60, show_default=True)
@click.option("--dump", "dumpdir", type=click.Path(file_okay=False), required=True)
def play_cmd(game_id: str, agent: str, seed: int, frames: int, dumpdir: str) -> None:
    """Roll out and dump frames with REM (solid) and VEM (dashed) box overlays."""
    _announce(command="play", game=game_id, agent=agent, seed=seed, frames=frames)
    out = Path(dumpdir)
    out.mkdir(parents=True, exist_ok=True)
    con = console_mod.create(game_id, seed)
    policy = make_agent(agent, game_id, seed)
    for t in range(frames):
        if con.terminated:
            break
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec,
                          con.frame_counter)
        con.tick(policy.act(rem))
        frame = con.render()
        rem = extract_rem(bytes(con.ram), con.cartridge.decoder_spec,
                          con.frame_counter)
        vem = extract_vem(frame, con.cartridge.vision_spec, con.cartridge.palette,
                          con.frame_counter)
        rgb = to_rgb(frame, con.cartridge.palette).copy()
        _draw_overlay(rgb, rem, (255, 0, 0), dashed=False)
        _draw_overlay(rgb, vem, (0, 255, 255), dashed=True)
        Image.fromarray(rgb).save(out / f"{game_id}_{t + 1:05d}.png")
    click.echo(f"dumped frames to {out}")


@main.command("serve")
@click.option("--port", type=click.IntRange(1, 65535), default=8000, show_default=True)
@click.option("--game", "game_id", type=GAME_CHOICE, default="paddle", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--token", default=None, help="Capability token required for set_ram.")
@click.option("--static-dir", type=click.Path(file_okay=False, exists=True),
              default=None, help="Serve a built UI bundle from this directory.")
def serve_cmd(port: int, game_id: str, seed: int, host: str,
              token: str | None, static_dir: str | None) -> None:
    """Run the inspector session server."""
    import uvicorn

    from .inspector import create_app
    _announce(command="serve", game=game_id, seed=seed, port=port)
    app = create_app(game_id, seed, token=token, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
