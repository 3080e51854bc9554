"""Command-line front end for the full discovery pipeline.

Subcommands: simulate, replay, gen-dataset, discover, cluster, evaluate,
ablate, rerun. Every run writes a JSON manifest next to its primary output;
`rerun <manifest>` reproduces the run. Exit codes: 0 success, 2 usage,
3 invalid configuration, 4 malformed file, 5 backend/protocol failure,
6 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .dataset import DatasetFormatError, generate_dataset
from .evaluate import (
    LabeledBehavior,
    classify_behavior,
    default_calibration,
    export_embeddings,
    load_calibration,
    triplet_confusion,
)
from .medoids import k_medoids
from .metrics import MetricsBackend, handcrafted_embed
from .profiles import BUILTIN_PROFILES, ConfigurationError, SimProfile, resolve_profile
from .protocol import EmbeddingEndpoint, EndpointBackend, EndpointSession, ProtocolError
from .render import rasterize_positions, subsample_indices, write_pgm
from .search import (
    ArchiveFormatError,
    DiscoveryBackendError,
    NoveltyArchive,
    SearchConfig,
    load_archive,
    run_discovery,
    save_archive,
)
from .sim import ControllerGenome, GenomeBoundsError, Trajectory, run_episode, wall_slide_probe
from .synthetic import LABELS, make_labeled_suite

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_FORMAT = 4
EXIT_BACKEND = 5
EXIT_IO = 6

PROFILE_ENV = "SWARMBD_PROFILE_DIR"


def _resolve_profile_arg(name_or_path: str) -> SimProfile:
    """Built-in name, literal path, or a file under $SWARMBD_PROFILE_DIR."""
    if name_or_path not in BUILTIN_PROFILES and not os.path.exists(name_or_path):
        root = os.environ.get(PROFILE_ENV)
        if root:
            candidate = os.path.join(root, name_or_path)
            if os.path.exists(candidate):
                return resolve_profile(candidate)
    return resolve_profile(name_or_path)


def _parse_genome(text: str) -> ControllerGenome:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigurationError(f"--genome needs 4 comma-separated values, got {text!r}")
    try:
        return ControllerGenome(*(float(p) for p in parts))
    except ValueError:
        raise ConfigurationError(f"--genome values must be numbers, got {text!r}") from None


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ConfigurationError(f"--size must look like 64x64, got {text!r}") from None


def _write_manifest(out_path: str, subcommand: str, params: dict, outputs: list[str]) -> str:
    manifest = {
        "tool": "swarmbd",
        "version": __version__,
        "subcommand": subcommand,
        "params": params,
        "outputs": outputs,
    }
    path = str(out_path) + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _save_trajectory(traj: Trajectory, path: str) -> None:
    from .profiles import format_profile_text

    np.savez_compressed(
        path,
        format_version=np.int64(1),
        positions=traj.positions,
        headings=traj.headings,
        velocities=traj.velocities,
        sensors=traj.sensors,
        genome=traj.genome.as_array() if traj.genome else np.full(4, np.nan),
        seed=np.uint64(traj.seed if traj.seed is not None else 0),
        profile_text=np.bytes_(format_profile_text(traj.profile).encode("utf-8")),
    )


def _load_trajectory(path: str) -> Trajectory:
    from .profiles import parse_profile_text

    with np.load(path) as data:
        if "format_version" not in data or int(data["format_version"]) != 1:
            raise ArchiveFormatError("unrecognized trajectory file version", 0)
        profile = parse_profile_text(bytes(data["profile_text"]).decode("utf-8"))
        genome_arr = data["genome"]
        genome = None if np.isnan(genome_arr).any() else ControllerGenome.from_array(genome_arr)
        return Trajectory(
            data["positions"], data["headings"], data["velocities"],
            data["sensors"].astype(np.int8), profile, genome, int(data["seed"]),
        )


def _cmd_simulate(args) -> int:
    profile = _resolve_profile_arg(args.profile)
    genome = _parse_genome(args.genome)
    traj = run_episode(genome, profile, args.seed)
    _save_trajectory(traj, args.out)
    outputs = [args.out]
    if args.frames_dir:
        os.makedirs(args.frames_dir, exist_ok=True)
        w, h = _parse_size(args.size)
        for idx in subsample_indices(traj.episode_steps):
            frame = rasterize_positions(traj.positions[idx], profile, w, h)
            frame_path = os.path.join(args.frames_dir, f"step{idx:05d}.pgm")
            write_pgm(frame, frame_path)
            outputs.append(frame_path)
    _write_manifest(args.out, "simulate", _ns_params(args), outputs)
    print(f"wrote trajectory ({traj.episode_steps} steps, {traj.n_agents} agents) to {args.out}")
    return EXIT_OK


def _cmd_replay(args) -> int:
    traj = _load_trajectory(args.traj)
    os.makedirs(args.out_dir, exist_ok=True)
    w, h = _parse_size(args.size)
    outputs = []
    for idx in range(0, traj.episode_steps + 1, args.every):
        frame = rasterize_positions(traj.positions[idx], traj.profile, w, h)
        frame_path = os.path.join(args.out_dir, f"step{idx:05d}.pgm")
        write_pgm(frame, frame_path)
        outputs.append(frame_path)
    _write_manifest(os.path.join(args.out_dir, "replay"), "replay", _ns_params(args), outputs)
    print(f"wrote {len(outputs)} frames to {args.out_dir}")
    return EXIT_OK


def _cmd_gen_dataset(args) -> int:
    profile = _resolve_profile_arg(args.profile)
    w, h = _parse_size(args.size)
    summary = generate_dataset(
        args.n, profile, args.seed, args.out,
        profile_name=args.profile, width=w, height=h,
    )
    _write_manifest(args.out, "gen-dataset", _ns_params(args), [args.out])
    print(f"wrote {summary['records']} records of shape {summary['frame_shape']} to {args.out}")
    return EXIT_OK


def _make_backend(args):
    if args.backend == "metrics":
        return MetricsBackend(), None
    if not args.endpoint:
        raise ConfigurationError("--backend endpoint requires --endpoint")
    session = EndpointSession(EmbeddingEndpoint(args.endpoint))
    return EndpointBackend(session), session


def _medoid_report(archive: NoveltyArchive, k: int, profile, calibration, path: str) -> list[str]:
    medoids, assignments = k_medoids(archive.vectors, k)
    lines = [
        "# medoid report",
        f"archive_size={len(archive)}",
        f"k={k}",
        "# rank\tarchive_index\tgeneration\tcluster_size\tu_v0\tu_w0\tu_v1\tu_w1\tlabel",
    ]
    labels = []
    genomes = archive.genomes
    gens = archive.generations
    seeds = archive.seeds
    for rank, m in enumerate(medoids):
        genome = ControllerGenome.from_array(genomes[m])
        traj = run_episode(genome, profile, int(seeds[m]))
        label = classify_behavior(traj, profile, calibration)
        labels.append(label)
        size = int((assignments == rank).sum())
        genome_txt = "\t".join(repr(float(v)) for v in genomes[m])
        lines.append(f"{rank}\t{int(m)}\t{int(gens[m])}\t{size}\t{genome_txt}\t{label}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return labels


def _cmd_discover(args) -> int:
    profile = _resolve_profile_arg(args.profile)
    config = SearchConfig(
        population=args.pop, generations=args.gens, k_neighbors=args.k,
        crossover_rate=args.crossover, mutation_rate=args.mutation,
        seed=args.seed, k_medoids=args.k_medoids,
    )
    backend, session = _make_backend(args)
    calibration = load_calibration(args.calibration) if args.calibration else default_calibration()
    try:
        archive = run_discovery(profile, config, backend, args.seed_policy)
    except DiscoveryBackendError as exc:
        if len(exc.partial_archive):
            save_archive(exc.partial_archive, args.out)
            print(f"backend failed; partial archive ({len(exc.partial_archive)} entries) "
                  f"saved to {args.out}", file=sys.stderr)
        raise
    finally:
        if session is not None:
            session.close()
    save_archive(archive, args.out)
    report_path = args.report or (str(args.out) + ".medoids.txt")
    labels = _medoid_report(archive, config.k_medoids, profile, calibration, report_path)
    _write_manifest(args.out, "discover", _ns_params(args), [args.out, report_path])
    print(f"archive: {len(archive)} entries -> {args.out}")
    print(f"medoids: {', '.join(labels)} -> {report_path}")
    return EXIT_OK


def _cmd_cluster(args) -> int:
    archive = load_archive(args.archive)
    profile = _resolve_profile_arg(args.profile)
    calibration = load_calibration(args.calibration) if args.calibration else default_calibration()
    report_path = args.report or (str(args.archive) + f".medoids{args.k}.txt")
    labels = _medoid_report(archive, args.k, profile, calibration, report_path)
    _write_manifest(report_path, "cluster", _ns_params(args), [report_path])
    print(f"medoids: {', '.join(labels)} -> {report_path}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    outputs = []
    if args.synthetic:
        profile = _resolve_profile_arg(args.profile)
        suite = make_labeled_suite(profile, args.n_per_class, args.seed)
        labeled = [
            LabeledBehavior(label, handcrafted_embed(traj, profile).as_vector().values)
            for traj, label in suite
        ]
        matrix = triplet_confusion(labeled)
        text = matrix.to_text()
        print(text, end="")
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text + "\n" + matrix.to_keyvalues())
            outputs.append(args.out)
            _write_manifest(args.out, "evaluate", _ns_params(args), outputs)
    elif args.archive:
        archive = load_archive(args.archive)
        if not args.export:
            raise ConfigurationError("evaluating an archive requires --export PATH")
        export_embeddings(archive, args.export)
        outputs.append(args.export)
        _write_manifest(args.export, "evaluate", _ns_params(args), outputs)
        print(f"exported {len(archive)} embeddings to {args.export}")
    else:
        raise ConfigurationError("evaluate needs --synthetic or --archive")
    return EXIT_OK


def _cmd_ablate(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    config_kwargs = dict(
        population=args.pop, generations=args.gens, k_neighbors=args.k,
        seed=args.seed, k_medoids=args.k_medoids,
    )
    backend = MetricsBackend()
    calibration = default_calibration()
    label_counts = {}
    outputs = []
    for name in ("rsrs", "default"):
        profile = _resolve_profile_arg(name)
        archive = run_discovery(profile, SearchConfig(**config_kwargs), backend, args.seed_policy)
        arc_path = os.path.join(args.out_dir, f"{name}.swar")
        save_archive(archive, arc_path)
        report_path = os.path.join(args.out_dir, f"{name}.medoids.txt")
        labels = _medoid_report(archive, args.k_medoids, profile, calibration, report_path)
        label_counts[name] = {lab: labels.count(lab) for lab in LABELS}
        outputs += [arc_path, report_path]

    # friction mechanism probe: tangential wall progress per step
    slide_default = wall_slide_probe(_resolve_profile_arg("default"))
    slide_rsrs_mu1 = wall_slide_probe(_resolve_profile_arg("rsrs").with_overrides(friction_mu=1.0))

    lines = ["# profile ablation report", f"seed={args.seed}",
             "", "behavior\trsrs\tdefault"]
    for lab in LABELS:
        lines.append(f"{lab}\t{label_counts['rsrs'][lab]}\t{label_counts['default'][lab]}")
    lines += [
        "",
        f"wall_slide.default.progress_per_step={slide_default!r}",
        f"wall_slide.rsrs_mu1.progress_per_step={slide_rsrs_mu1!r}",
    ]
    report = os.path.join(args.out_dir, "ablate_report.txt")
    with open(report, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    outputs.append(report)
    _write_manifest(report, "ablate", _ns_params(args), outputs)
    print("\n".join(lines))
    return EXIT_OK


def _cmd_rerun(args) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    sub = manifest["subcommand"]
    params = manifest["params"]
    argv = [sub]
    for key, val in params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif val is not None:
            argv += [flag, str(val)]
    return cli_dispatch(argv)


def _ns_params(args) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmbd",
        description="Swarm behavior discovery: simulate, represent, search, evaluate.",
    )
    parser.add_argument("--version", action="version", version=f"swarmbd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one episode and store the trajectory")
    p.add_argument("--genome", required=True, help="u_v0,u_w0,u_v1,u_w1")
    p.add_argument("--profile", default="rsrs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--frames-dir", default=None, help="also dump the 3 summary frames as PGM")
    p.add_argument("--size", default="64x64")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("replay", help="rasterize a stored trajectory to PGM frames")
    p.add_argument("--traj", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--every", type=int, default=10)
    p.add_argument("--size", default="64x64")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("gen-dataset", help="simulate random controllers into a dataset file")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--profile", default="rsrs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--size", default="64x64")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("discover", help="novelty search over the controller space")
    p.add_argument("--profile", default="rsrs")
    p.add_argument("--backend", choices=("metrics", "endpoint"), default="metrics")
    p.add_argument("--endpoint", default=None, help="host:port or server command line")
    p.add_argument("--pop", type=int, default=50)
    p.add_argument("--gens", type=int, default=100)
    p.add_argument("--k", type=int, default=15, help="novelty nearest neighbors")
    p.add_argument("--k-medoids", type=int, default=10)
    p.add_argument("--crossover", type=float, default=0.7)
    p.add_argument("--mutation", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seed-policy", choices=("fixed", "per-genome"), default="fixed")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--calibration", default=None)
    p.set_defaults(func=_cmd_discover)

    p = sub.add_parser("cluster", help="k-medoids over a stored archive")
    p.add_argument("--archive", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--profile", default="rsrs")
    p.add_argument("--report", default=None)
    p.add_argument("--calibration", default=None)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("evaluate", help="triplet confusion matrix or embedding export")
    p.add_argument("--synthetic", action="store_true",
                   help="evaluate hand-crafted metrics on the generator suite")
    p.add_argument("--profile", default="rsrs")
    p.add_argument("--n-per-class", type=int, default=12)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--archive", default=None)
    p.add_argument("--export", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("ablate", help="discover twice (rsrs vs default) and compare classes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pop", type=int, default=20)
    p.add_argument("--gens", type=int, default=15)
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--k-medoids", type=int, default=6)
    p.add_argument("--seed-policy", choices=("fixed", "per-genome"), default="fixed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("rerun", help="re-execute a run from its manifest")
    p.add_argument("manifest")
    p.set_defaults(func=_cmd_rerun)
    return parser


def cli_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (DatasetFormatError, ArchiveFormatError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (ConfigurationError, GenomeBoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProtocolError, DiscoveryBackendError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
