import json
import os

import numpy as np
import pytest

from tagtrack.cli import main
from tagtrack.features import Frame
from tagtrack.geometry import BoundingBox
from tagtrack.io import DetectionSet, NoiseProfile
from tagtrack.metrics import TrajectorySet, clear_metrics, load_trajectories
from tagtrack.pipeline import (ConfigError, PipelineConfig, TeleportInjection, Tracker,
                               dump_config, load_config, parse_overrides, render_overlays,
                               run_sequence, simulate_sequence, trajectory_plot)
from tagtrack.pipeline.frames import iter_frames, list_frames, read_frame, write_frame
from tagtrack.sim import SceneConfig


def small_sequence(n_frames=25, seed=0, **kw):
    scene = SceneConfig(width=320, height=240, n_agents=3, agent_length=60, agent_width=32,
                        n_frames=n_frames, seed=seed, **kw)
    return simulate_sequence(scene, NoiseProfile())


def test_config_defaults_file_and_overrides(tmp_path):
    cfg = load_config()
    assert cfg.association.age_threshold == 10 and cfg.tracker.n_components == 30
    ini = tmp_path / "run.ini"
    ini.write_text("[tracker]\nscale_set = 0.95, 1.0, 1.05\nupdate_interval = 3\n"
                   "[association]\ndelta = 0.25  # inline comment\n[pipeline]\nworkers = 2\n"
                   "[scene]\nn_agents = 4\n")
    cfg = load_config(ini, ["tracker.update_interval=4", "noise.fp_rate=0.2"])
    assert cfg.tracker.scale_set == (0.95, 1.0, 1.05)
    assert cfg.tracker.update_interval == 4
    assert cfg.association.delta == 0.25
    assert cfg.workers == 2
    assert cfg.scene == {"n_agents": 4} and cfg.noise == {"fp_rate": 0.2}
    again = tmp_path / "dump.ini"
    again.write_text(dump_config(cfg))
    assert load_config(again).tracker == cfg.tracker


@pytest.mark.parametrize("override", [
    "tracker.nope=1", "tracker.update_interval=abc", "tracker.n_components=0",
    "weird.key=1", "notanoverride", "pipeline.workers=0", "scene.occluder=x",
    "features.mode=dusk",
])
def test_config_errors(override):
    with pytest.raises(ConfigError):
        load_config(None, [override])


def test_parse_overrides_and_missing_file(tmp_path):
    assert parse_overrides(["a.b=1=2"]) == {"a": {"b": "1=2"}}
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    cfg = PipelineConfig(frames_dir=str(tmp_path / "nothing"))
    with pytest.raises(ConfigError):
        cfg.check_paths()


def test_frame_files_round_trip(tmp_path, rng):
    color = Frame((rng.random((20, 30, 3)) * 255).astype(np.uint8))
    gray = Frame((rng.random((20, 30)) * 255).astype(np.uint8))
    write_frame(color, tmp_path, 0)
    write_frame(gray, tmp_path, 1)
    write_frame(color, tmp_path, 3)
    assert sorted(list_frames(tmp_path)) == [0, 1, 3]
    frames = list(iter_frames(tmp_path))
    assert len(frames) == 2
    np.testing.assert_array_equal(frames[0].to_uint8(), color.to_uint8())
    assert read_frame(list_frames(tmp_path)[1]).mode == "grayscale"


def test_clean_small_scene_is_tracked_perfectly():
    seq = small_sequence()
    log = run_sequence(seq.frames(), seq.detections, seq.initial_boxes)
    assert log.completed and len(log.timings) == 25
    report = clear_metrics(seq.ground_truth, log.trajectories)
    assert report.mota == 1.0 and report.ids == 0
    assert log.tag_boxes.ids == [1, 2, 3]


def test_threaded_run_matches_serial():
    seq = small_sequence(12, seed=2)
    a = run_sequence(seq.frames(), seq.detections, seq.initial_boxes)
    b = run_sequence(seq.frames(), seq.detections, seq.initial_boxes, PipelineConfig(workers=3))
    assert a.trajectories.tracks == b.trajectories.tracks
    assert a.tag_boxes.tracks == b.tag_boxes.tracks


def test_missing_detections_fall_back_to_tag_boxes():
    seq = small_sequence(10)
    log = run_sequence(seq.frames(), [seq.detections[0]], seq.initial_boxes)
    assert log.completed and len(log.timings) == 10
    report = clear_metrics(seq.ground_truth, log.trajectories)
    assert report.mota > 0.9


def test_teleported_tag_box_recovers():
    seq = small_sequence(30, seed=1)
    cfg = PipelineConfig()
    inj = TeleportInjection(2, 5, 6, (5.0, 5.0))
    log = run_sequence(seq.frames(), seq.detections, seq.initial_boxes, cfg, perturb=inj)
    drift = log.events_of("drift", 2)
    reinit = log.events_of("reinit", 2)
    assert drift and drift[0] == 5
    assert reinit and reinit[0] <= 6 + cfg.association.age_threshold + 2
    end_tag = log.tag_boxes.tracks[2][-1][1]
    gt_end = seq.ground_truth.tracks[2][-1][1]
    assert abs(end_tag.cx - gt_end.cx) < 4 and abs(end_tag.cy - gt_end.cy) < 4


def test_tracker_input_checks():
    with pytest.raises(ValueError):
        Tracker([])
    with pytest.raises(ValueError):
        Tracker([(1, BoundingBox(0, 0, 5, 5)), (1, BoundingBox(9, 9, 5, 5))])
    seq = small_sequence(2)
    tr = Tracker(seq.initial_boxes)
    tr.step(next(seq.frames()), seq.detections[0])
    with pytest.raises(ValueError):
        tr.step(next(seq.frames()), DetectionSet(5))


def test_failure_attaches_partial_log():
    seq = small_sequence(4)

    def frames():
        yield from list(seq.frames())[:2]
        raise RuntimeError("camera unplugged")

    with pytest.raises(RuntimeError) as err:
        run_sequence(frames(), seq.detections, seq.initial_boxes)
    assert len(err.value.run_log.timings) == 2 and not err.value.run_log.completed


def test_overlays(tmp_path):
    seq = small_sequence(3)
    frames_dir = tmp_path / "frames"
    for t, f in enumerate(seq.frames()):
        write_frame(f, frames_dir, t)
    hyp = TrajectorySet()
    for tid, b in seq.initial_boxes:
        hyp.add(tid, 0, b)
        hyp.add(tid, 1, b)
    out = tmp_path / "vis"
    written = render_overlays(frames_dir, hyp, out)
    assert len(written) == 3
    frame2 = list_frames(frames_dir)[2]
    assert open(written[2], "rb").read() == open(frame2, "rb").read()
    drawn = read_frame(written[0]).to_uint8()
    b = seq.initial_boxes[0][1]
    assert tuple(drawn[int(b.y) + 1, int(b.cx)]) == (255, 0, 0)
    hyp.add(1, 7, b)
    with pytest.raises(FileNotFoundError, match="frame 7"):
        render_overlays(frames_dir, hyp, out)
    p = trajectory_plot(seq.ground_truth, (320, 240), tmp_path / "plot.png")
    assert read_frame(p).to_uint8().shape == (240, 320, 3)


def run_cli(*args):
    return main([str(a) for a in args])


def test_cli_simulate_track_evaluate_render(tmp_path, capsys):
    sim = tmp_path / "sim"
    assert run_cli("simulate", "--scenario", "clean", "--frames", 6, "--out", sim,
                   "--set", "scene.n_agents=3") == 0
    for name in ("gt.csv", "detections.csv", "initial_boxes.csv", "scene.json"):
        assert (sim / name).exists()
    assert len(list_frames(sim / "frames")) == 6
    assert json.loads((sim / "scene.json").read_text())["scene"]["n_agents"] == 3
    run = tmp_path / "run"
    assert run_cli("track", "--frames-dir", sim / "frames", "--detections", sim / "detections.csv",
                   "--init", sim / "initial_boxes.csv", "--out", run) == 0
    assert load_trajectories(run / "trajectories.csv").ids == [1, 2, 3]
    assert json.loads((run / "runlog.json").read_text())["completed"]
    capsys.readouterr()
    assert run_cli("evaluate", "--gt", sim / "gt.csv", "--hyp", run / "trajectories.csv",
                   "--out", run, "--label", "clean") == 0
    out = capsys.readouterr().out
    assert out.splitlines()[-1].startswith("clean\t100.00\t100.00")
    assert json.loads((run / "metrics.json").read_text())["mota"] == 1.0
    assert run_cli("render", "--frames-dir", sim / "frames", "--trajectories",
                   run / "trajectories.csv", "--tagboxes", run / "tagboxes.csv", "--plot",
                   "--out", tmp_path / "vis") == 0
    assert len(os.listdir(tmp_path / "vis" / "overlays")) == 6
    assert (tmp_path / "vis" / "trajectories.png").exists()


def test_cli_all(tmp_path):
    out = tmp_path / "all"
    assert run_cli("all", "--scenario", "S1", "--frames", 4, "--seed", 2, "--out", out,
                   "--set", "scene.n_agents=2", "--save-frames") == 0
    for name in ("gt.csv", "trajectories.csv", "tagboxes.csv", "metrics.json", "metrics.txt",
                 "runlog.json"):
        assert (out / name).exists()
    assert len(list_frames(out / "frames")) == 4


def test_cli_exit_codes(tmp_path, capsys):
    assert run_cli("all", "--scenario", "S9", "--out", tmp_path) == 2
    assert run_cli("all", "--set", "tracker.bogus=1", "--out", tmp_path) == 2
    assert run_cli("track", "--out", tmp_path) == 2
    # S3' huddles need agents 6 and 7
    assert run_cli("simulate", "--scenario", "S3'", "--set", "scene.n_agents=2", "--out", tmp_path) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("frame,x,y,w,h,confidence\n0,1,2,x,4,1\n")
    init = tmp_path / "init.csv"
    init.write_text("id,x,y,w,h\n1,0,0,5,5\n")
    (tmp_path / "frames").mkdir()
    assert run_cli("track", "--frames-dir", tmp_path / "frames", "--detections", bad,
                   "--init", init, "--out", tmp_path) == 3
    assert run_cli("track", "--frames-dir", tmp_path / "nope", "--detections", bad,
                   "--init", init, "--out", tmp_path) == 4
    assert run_cli("evaluate", "--gt", tmp_path / "none.csv", "--hyp", bad, "--out", tmp_path) == 4
    err = capsys.readouterr().err
    assert "error[config]" in err and "error[input]" in err and "error[io]" in err
    with pytest.raises(SystemExit) as exc:
        run_cli("track", "--bogus-flag")
    assert exc.value.code == 2


def test_cli_tracking_failure_code(tmp_path):
    frames = tmp_path / "frames"
    write_frame(Frame(np.full((100, 100, 3), 128, dtype=np.uint8)), frames, 0)
    det = tmp_path / "d.csv"
    det.write_text("frame,x,y,w,h,confidence\n0,10,10,40,30,1\n")
    init = tmp_path / "i.csv"
    init.write_text("id,x,y,w,h\n1,10,10,40,30\n")
    assert run_cli("track", "--frames-dir", frames, "--detections", det, "--init", init,
                   "--out", tmp_path / "o") == 5


def test_cli_failure_flushes_partial_run(tmp_path):
    rng = np.random.default_rng(0)
    frames = tmp_path / "frames"
    textured = (rng.random((100, 100, 3)) * 255).astype(np.uint8)
    write_frame(Frame(textured), frames, 0)
    write_frame(Frame(textured), frames, 1)
    # a flat grayscale frame forces a model rebuild that has nothing to learn from
    write_frame(Frame(np.zeros((100, 100), np.uint8)), frames, 2)
    det = tmp_path / "d.csv"
    det.write_text("0,30,30,40,30,1\n1,30,30,40,30,1\n2,30,30,40,30,1\n")
    init = tmp_path / "i.csv"
    init.write_text("1,30,30,40,30\n")
    code = run_cli("track", "--frames-dir", frames, "--detections", det, "--init", init,
                   "--out", tmp_path / "o")
    assert code == 5
    log = json.loads((tmp_path / "o" / "runlog.json").read_text())
    assert not log["completed"] and log["frames"] == 2
    assert len(load_trajectories(tmp_path / "o" / "trajectories.csv")) == 2
