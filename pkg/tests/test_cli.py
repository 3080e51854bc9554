import json
import subprocess
import sys

from swarmbd.cli import (
    EXIT_BACKEND,
    EXIT_CONFIG,
    EXIT_FORMAT,
    EXIT_OK,
    EXIT_USAGE,
    cli_dispatch,
    _load_trajectory,
)
from swarmbd.dataset import read_dataset
from swarmbd.search import load_archive

from test_protocol import server_cmd


def run_cli(*argv) -> int:
    return cli_dispatch([str(a) for a in argv])


def test_usage_error_unknown_flag(capsys):
    assert run_cli("simulate", "--bogus") == EXIT_USAGE


def test_usage_error_no_command():
    assert run_cli() == EXIT_USAGE


def test_simulate_and_replay(tmp_path):
    out = tmp_path / "traj.npz"
    frames = tmp_path / "frames"
    code = run_cli(
        "simulate", "--genome", "0.05,0.3,-0.02,1.0", "--profile", "rsrs",
        "--seed", 9, "--out", out, "--frames-dir", frames,
    )
    assert code == EXIT_OK
    traj = _load_trajectory(out)
    assert traj.episode_steps == 600
    assert traj.seed == 9
    pgms = sorted(frames.glob("*.pgm"))
    assert [p.name for p in pgms] == ["step00300.pgm", "step00450.pgm", "step00599.pgm"]
    assert (tmp_path / "traj.npz.manifest.json").exists()

    replay_dir = tmp_path / "replay"
    assert run_cli("replay", "--traj", out, "--out-dir", replay_dir, "--every", 200) == EXIT_OK
    assert len(list(replay_dir.glob("*.pgm"))) == 4   # steps 0, 200, 400, 600
    # replayed frame at a stack index matches the simulate-time dump
    assert run_cli("replay", "--traj", out, "--out-dir", replay_dir, "--every", 300) == EXIT_OK
    assert (replay_dir / "step00300.pgm").read_bytes() == (frames / "step00300.pgm").read_bytes()


def test_simulate_genome_validation(tmp_path):
    assert run_cli("simulate", "--genome", "1,2,3", "--out", tmp_path / "x.npz") == EXIT_CONFIG
    assert run_cli("simulate", "--genome", "0.5,0,0,0", "--out", tmp_path / "x.npz") == EXIT_CONFIG


def test_gen_dataset_deterministic(tmp_path):
    a, b = tmp_path / "a.swbd", tmp_path / "b.swbd"
    prof = tmp_path / "fast.cfg"
    prof.write_text("episode_steps=40\n")
    for out in (a, b):
        assert run_cli("gen-dataset", "--n", 5, "--profile", prof, "--seed", 1, "--out", out) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    header, records = read_dataset(a)
    assert header.record_count == 5


def test_discover_desk_scale(tmp_path):
    out = tmp_path / "arc.swar"
    code = run_cli(
        "discover", "--profile", "rsrs", "--backend", "metrics",
        "--pop", 10, "--gens", 10, "--k", 5, "--k-medoids", 5,
        "--seed", 1, "--out", out,
    )
    assert code == EXIT_OK
    archive = load_archive(out)
    assert len(archive) == 100
    report = (str(out) + ".medoids.txt")
    lines = [l for l in open(report).read().splitlines() if l and not l.startswith("#")]
    medoid_rows = [l for l in lines if "\t" in l]
    assert len(medoid_rows) == 5
    from swarmbd.synthetic import LABELS

    for row in medoid_rows:
        assert row.split("\t")[-1] in LABELS
    manifest = json.load(open(str(out) + ".manifest.json"))
    assert manifest["subcommand"] == "discover"
    assert manifest["params"]["pop"] == 10


def test_discover_endpoint_backend(tmp_path):
    out = tmp_path / "arc.swar"
    code = run_cli(
        "discover", "--backend", "endpoint", "--endpoint", server_cmd("--dim", "6"),
        "--pop", 4, "--gens", 2, "--k", 3, "--k-medoids", 2, "--seed", 2, "--out", out,
    )
    assert code == EXIT_OK
    archive = load_archive(out)
    assert archive.dim == 6
    assert archive.backend == "learned"


def test_discover_endpoint_requires_spec(tmp_path):
    assert run_cli("discover", "--backend", "endpoint", "--out", tmp_path / "x.swar") == EXIT_CONFIG


def test_discover_backend_failure_persists_partial(tmp_path):
    out = tmp_path / "arc.swar"
    code = run_cli(
        "discover", "--backend", "endpoint", "--endpoint", server_cmd("--close-after", "6"),
        "--pop", 4, "--gens", 3, "--k", 3, "--k-medoids", 2, "--seed", 2, "--out", out,
    )
    assert code == EXIT_BACKEND
    partial = load_archive(out)
    assert len(partial) == 4   # only generation 0 completed


def test_cluster_from_archive(tmp_path):
    out = tmp_path / "arc.swar"
    run_cli("discover", "--pop", 8, "--gens", 3, "--k", 3, "--k-medoids", 2,
            "--seed", 4, "--out", out)
    report = tmp_path / "medoids.txt"
    assert run_cli("cluster", "--archive", out, "--k", 3, "--report", report) == EXIT_OK
    rows = [l for l in report.read_text().splitlines() if "\t" in l and not l.startswith("#")]
    assert len(rows) == 3


def test_cluster_bad_archive(tmp_path):
    bad = tmp_path / "bad.swar"
    bad.write_bytes(b"JUNKJUNKJUNK")
    assert run_cli("cluster", "--archive", bad, "--k", 2) == EXIT_FORMAT


def test_evaluate_synthetic(tmp_path, capsys):
    out = tmp_path / "matrix.txt"
    code = run_cli("evaluate", "--synthetic", "--n-per-class", 4, "--seed", 3, "--out", out)
    assert code == EXIT_OK
    text = out.read_text()
    assert "cyclic_pursuit" in text
    assert "aggregation,dispersal=" in text


def test_evaluate_archive_export(tmp_path):
    arc = tmp_path / "arc.swar"
    run_cli("discover", "--pop", 6, "--gens", 2, "--k", 3, "--k-medoids", 2,
            "--seed", 5, "--out", arc)
    export = tmp_path / "emb.tsv"
    assert run_cli("evaluate", "--archive", arc, "--export", export) == EXIT_OK
    assert len(export.read_text().splitlines()) == 12
    assert run_cli("evaluate", "--archive", arc) == EXIT_CONFIG


def test_evaluate_needs_mode():
    assert run_cli("evaluate") == EXIT_CONFIG


def test_rerun_reproduces_gen_dataset(tmp_path):
    prof = tmp_path / "fast.cfg"
    prof.write_text("episode_steps=30\n")
    out = tmp_path / "a.swbd"
    run_cli("gen-dataset", "--n", 4, "--profile", prof, "--seed", 8, "--out", out)
    first = out.read_bytes()
    out.unlink()
    assert run_cli("rerun", str(out) + ".manifest.json") == EXIT_OK
    assert out.read_bytes() == first


def test_rerun_reproduces_discover_bit_exactly(tmp_path):
    out = tmp_path / "arc.swar"
    run_cli("discover", "--pop", 6, "--gens", 3, "--k", 3, "--k-medoids", 2,
            "--seed", 11, "--out", out)
    archive_bytes = out.read_bytes()
    report_bytes = open(str(out) + ".medoids.txt", "rb").read()
    out.unlink()
    assert run_cli("rerun", str(out) + ".manifest.json") == EXIT_OK
    assert out.read_bytes() == archive_bytes
    assert open(str(out) + ".medoids.txt", "rb").read() == report_bytes


def test_ablate_report(tmp_path):
    out_dir = tmp_path / "ablation"
    code = run_cli("ablate", "--seed", 3, "--pop", 8, "--gens", 4, "--k", 5,
                   "--k-medoids", 3, "--out-dir", out_dir)
    assert code == EXIT_OK
    report = (out_dir / "ablate_report.txt").read_text()
    assert "behavior\trsrs\tdefault" in report
    slide_lines = [l for l in report.splitlines() if l.startswith("wall_slide.")]
    assert len(slide_lines) == 2
    values = {l.split("=")[0]: float(l.split("=")[1]) for l in slide_lines}
    assert values["wall_slide.default.progress_per_step"] > 0
    assert values["wall_slide.rsrs_mu1.progress_per_step"] == 0.0
    assert (out_dir / "rsrs.swar").exists()
    assert (out_dir / "default.swar").exists()
    assert load_archive(out_dir / "rsrs.swar").backend == "metrics"


def test_profile_dir_env_var(tmp_path, monkeypatch):
    profdir = tmp_path / "profiles"
    profdir.mkdir()
    (profdir / "tiny.cfg").write_text("episode_steps=25\nn_agents=2\n")
    monkeypatch.setenv("SWARMBD_PROFILE_DIR", str(profdir))
    out = tmp_path / "traj.npz"
    assert run_cli("simulate", "--genome", "0.01,0,0.01,0", "--profile", "tiny.cfg",
                   "--seed", 1, "--out", out) == EXIT_OK
    traj = _load_trajectory(out)
    assert traj.episode_steps == 25
    assert traj.n_agents == 2


def test_console_script_version():
    result = subprocess.run(
        [sys.executable, "-m", "swarmbd.cli", "--version"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert "swarmbd" in result.stdout
