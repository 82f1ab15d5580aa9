"""Dataset generation and parsing tests."""

import csv
import json
from pathlib import Path

import pytest

from ramvision.model import GameObject
from ramvision.oda import (
    DatasetError,
    agent_schedule,
    generate,
    parse,
    _parse_objects,
    _serialize_objects,
)


class TestAgentSchedule:
    def test_three_of_ten_random(self):
        schedule = agent_schedule(10, 0.3)
        assert schedule == ["random"] * 3 + ["scripted"] * 7

    def test_fraction_rounds_up(self):
        assert agent_schedule(3, 0.3) == ["random", "scripted", "scripted"]

    def test_extremes(self):
        assert agent_schedule(4, 0.0) == ["scripted"] * 4
        assert agent_schedule(4, 1.0) == ["random"] * 4


class TestObjectCells:
    def test_round_trip_plain(self):
        objs = (GameObject("Ball", 10, 20, 2, 4, (1, 2, 3)),)
        cell = _serialize_objects(objs)
        assert cell == "Ball,10,20,2,4,1,2,3"
        assert _parse_objects(cell, "00001_00001", "ram", hud=False) == objs

    def test_round_trip_with_value(self):
        objs = (GameObject("Score", 108, 4, 15, 5, (9, 9, 9), hud=True, value=42),)
        cell = _serialize_objects(objs)
        assert cell.endswith(",42")
        parsed = _parse_objects(cell, "00001_00001", "hud", hud=True)
        assert parsed[0].value == 42 and parsed[0].orientation is None

    def test_empty_cell(self):
        assert _parse_objects("", "00001_00001", "ram", hud=False) == ()

    def test_malformed_entry_names_location(self):
        with pytest.raises(DatasetError, match=r"row 00002_00007 column vis"):
            _parse_objects("Ball,1,2", "00002_00007", "vis", hud=False)

    def test_non_integer_field_names_location(self):
        with pytest.raises(DatasetError, match=r"column ram"):
            _parse_objects("Ball,a,2,3,4,5,6,7", "00001_00001", "ram", hud=False)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("ds")
    manifest = generate(("paddle", "invaders"), episodes_per_game=2,
                        frames_per_episode=5, random_fraction=0.3,
                        seed=11, outdir=out)
    return out, manifest


class TestGenerate:
    def test_layout(self, dataset):
        out, manifest = dataset
        assert (out / "paddle.csv").exists()
        assert (out / "invaders.csv").exists()
        assert (out / "manifest.json").exists()
        pngs = sorted(p.name for p in (out / "frames").iterdir())
        assert len(pngs) == 2 * 2 * 5
        assert pngs[0] == "invaders_00001_00001.png"

    def test_manifest_matches_written_file(self, dataset):
        out, manifest = dataset
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == manifest
        assert len(manifest["config_hash"]) == 16
        episodes = manifest["games"]["paddle"]["episodes"]
        assert [e["agent"] for e in episodes] == ["random", "scripted"]

    def test_rows_parse_and_index_correctly(self, dataset):
        out, _ = dataset
        rows = parse(out / "paddle.csv")
        assert len(rows) == 10
        assert rows[0].index == "00001_00001"
        assert rows[-1].index == "00002_00005"
        assert all(r.obs is None for r in rows)

    def test_hud_and_game_objects_disjoint(self, dataset):
        out, _ = dataset
        for row in parse(out / "invaders.csv"):
            assert all(o.hud for o in row.hud)
            assert not any(o.hud for o in row.ram)
            hud_cats = {o.category for o in row.hud}
            game_cats = {o.category for o in row.ram}
            assert not hud_cats & game_cats

    def test_vis_hud_flag_reconstructed(self, dataset):
        out, _ = dataset
        row = parse(out / "invaders.csv")[0]
        flagged = {o.category for o in row.vis if o.hud}
        assert flagged == {"Lives", "Score"}

    def test_png_paths_resolve(self, dataset):
        out, _ = dataset
        for row in parse(out / "paddle.csv"):
            assert (out / row.png).exists()

    def test_regeneration_is_byte_identical(self, dataset, tmp_path):
        out, _ = dataset
        generate(("paddle", "invaders"), episodes_per_game=2,
                 frames_per_episode=5, random_fraction=0.3,
                 seed=11, outdir=tmp_path)
        for name in ("paddle.csv", "invaders.csv", "manifest.json"):
            assert (tmp_path / name).read_bytes() == (out / name).read_bytes()
        for png in (out / "frames").iterdir():
            assert (tmp_path / "frames" / png.name).read_bytes() == png.read_bytes()

    def test_inline_obs_carries_pixels(self, tmp_path):
        generate(("paddle",), episodes_per_game=1, frames_per_episode=2,
                 seed=0, outdir=tmp_path, inline_obs=True)
        rows = parse(tmp_path / "paddle.csv")
        assert rows[0].obs is not None
        assert len(rows[0].obs) == 210 * 160 * 3

    def test_bad_fraction_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            generate(("paddle",), 1, 1, random_fraction=1.5, outdir=tmp_path)


class TestParseErrors:
    def write_csv(self, path: Path, rows):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in rows:
                writer.writerow(row)

    HEADER = ["index", "obs", "hud", "ram", "vis", "png"]

    def test_wrong_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        self.write_csv(p, [["idx", "frame"]])
        with pytest.raises(DatasetError, match="header"):
            parse(p)

    def test_bad_index_format(self, tmp_path):
        p = tmp_path / "bad.csv"
        self.write_csv(p, [self.HEADER, ["1_1", "", "", "", "", "x.png"]])
        with pytest.raises(DatasetError, match="index format"):
            parse(p)

    def test_non_increasing_index(self, tmp_path):
        p = tmp_path / "bad.csv"
        self.write_csv(p, [self.HEADER,
                           ["00001_00002", "", "", "", "", "a.png"],
                           ["00001_00001", "", "", "", "", "b.png"]])
        with pytest.raises(DatasetError, match="00001_00001"):
            parse(p)

    def test_wrong_column_count(self, tmp_path):
        p = tmp_path / "bad.csv"
        self.write_csv(p, [self.HEADER, ["00001_00001", "", ""]])
        with pytest.raises(DatasetError, match="columns"):
            parse(p)
