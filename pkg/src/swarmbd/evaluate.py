"""Representation quality evaluation and heuristic behavior labeling.

Triplet confusion matrices count how often an anchor embeds closer to a
same-class example than to an other-class example (ties count as failure).
The behavior classifier is a deterministic decision list over the
hand-crafted metrics plus wall-clearance and scatter-trend statistics, with
thresholds calibrated against the closed-form generators and shipped as a
versioned key=value file.
"""

from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass, fields

import numpy as np

from .medoids import pairwise_distances
from .metrics import (
    BehaviorVector,
    handcrafted_embed,
    mean_wall_clearance,
    scatter_series,
)
from .profiles import SimProfile
from .sim import Trajectory
from .synthetic import LABELS, make_labeled_suite

TRIPLET_SAMPLE_CAP = 100_000
_TRIPLET_SEED = 2024   # fixed subsampling stream


@dataclass(frozen=True)
class LabeledBehavior:
    label: str
    vector: np.ndarray
    genome: np.ndarray | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown label {self.label!r}; expected one of {LABELS}")


@dataclass
class ConfusionMatrix:
    """values[a, n] = triplet success fraction for anchor class a vs negative
    class n; the diagonal pools all other classes. NaN marks missing rows
    (classes with < 2 examples) and absent negative classes."""

    labels: tuple[str, ...]
    values: np.ndarray
    n_examples: dict[str, int]

    def cell(self, anchor: str, negative: str) -> float:
        return float(self.values[self.labels.index(anchor), self.labels.index(negative)])

    def missing_rows(self) -> list[str]:
        return [lab for lab in self.labels if self.n_examples.get(lab, 0) < 2]

    def to_text(self) -> str:
        width = max(len(lab) for lab in self.labels) + 2
        head = " " * width + "".join(f"{lab:>{width}}" for lab in self.labels)
        lines = [head]
        for i, lab in enumerate(self.labels):
            cells = "".join(
                f"{'--':>{width}}" if math.isnan(v) else f"{v:>{width}.3f}"
                for v in self.values[i]
            )
            lines.append(f"{lab:<{width}}" + cells)
        return "\n".join(lines) + "\n"

    def to_keyvalues(self) -> str:
        lines = []
        for i, a in enumerate(self.labels):
            for j, n in enumerate(self.labels):
                v = self.values[i, j]
                lines.append(f"{a},{n}={'missing' if math.isnan(v) else repr(float(v))}")
        return "\n".join(lines) + "\n"


def _vector_of(item) -> np.ndarray:
    vec = item.vector
    if isinstance(vec, BehaviorVector):
        vec = vec.values
    return np.asarray(vec, dtype=np.float64).reshape(-1)


def triplet_confusion(labeled: list[LabeledBehavior], seed: int = _TRIPLET_SEED) -> ConfusionMatrix:
    """Success fraction of dist(a,p) < dist(a,n) per (anchor, negative) pair.

    Cells with more than TRIPLET_SAMPLE_CAP valid triplets are estimated from
    that many uniform draws (fixed seed); smaller cells are enumerated
    exactly.
    """
    if not labeled:
        raise ValueError("labeled set is empty")
    x = np.stack([_vector_of(item) for item in labeled])
    groups: dict[str, list[int]] = {lab: [] for lab in LABELS}
    for i, item in enumerate(labeled):
        groups[item.label].append(i)
    dist = pairwise_distances(x)
    rng = np.random.default_rng(seed)

    idx = {lab: np.array(ix, dtype=np.int64) for lab, ix in groups.items()}
    values = np.full((len(LABELS), len(LABELS)), np.nan)
    counts = {lab: len(ix) for lab, ix in groups.items()}
    for ai, a_lab in enumerate(LABELS):
        a_idx = idx[a_lab]
        if len(a_idx) < 2:
            continue
        pooled_succ = 0.0
        pooled_total = 0
        for ni, n_lab in enumerate(LABELS):
            if n_lab == a_lab:
                continue
            n_idx = idx[n_lab]
            if len(n_idx) == 0:
                continue
            total = len(a_idx) * (len(a_idx) - 1) * len(n_idx)
            if total <= TRIPLET_SAMPLE_CAP:
                succ = 0
                for a in a_idx:
                    dn = np.sort(dist[a, n_idx])
                    dp = dist[a, a_idx[a_idx != a]]
                    # strictly-greater negatives per positive (ties fail)
                    succ += int((len(n_idx) - np.searchsorted(dn, dp, side="right")).sum())
                frac = succ / total
            else:
                a_s = a_idx[rng.integers(0, len(a_idx), TRIPLET_SAMPLE_CAP)]
                # positive drawn uniformly among the other members
                p_off = rng.integers(1, len(a_idx), TRIPLET_SAMPLE_CAP)
                a_pos = np.searchsorted(a_idx, a_s)
                p_s = a_idx[(a_pos + p_off) % len(a_idx)]
                n_s = n_idx[rng.integers(0, len(n_idx), TRIPLET_SAMPLE_CAP)]
                frac = float(np.mean(dist[a_s, p_s] < dist[a_s, n_s]))
            values[ai, ni] = frac
            pooled_succ += frac * total
            pooled_total += total
        if pooled_total:
            values[ai, ai] = pooled_succ / pooled_total
    return ConfusionMatrix(LABELS, values, counts)


# ---------------------------------------------------------------------------
# behavior classifier


@dataclass(frozen=True)
class ClassifierCalibration:
    """Decision-list thresholds; see classify_behavior for their roles."""

    rotation_high: float
    radial_variance_cyclic_max: float
    scatter_cyclic_min: float
    scatter_cyclic_max: float
    aggregation_final_max: float
    aggregation_decay_ratio: float
    dispersal_final_min: float
    dispersal_growth_ratio: float
    dispersal_stable_tol: float
    wall_clearance_max: float
    wall_speed_min: float
    version: int = 1
    profile_name: str = "rsrs"


def save_calibration(cal: ClassifierCalibration, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in fields(ClassifierCalibration):
            val = getattr(cal, f.name)
            fh.write(f"{f.name}={val!r}\n" if isinstance(val, float) else f"{f.name}={val}\n")


def load_calibration(path) -> ClassifierCalibration:
    kwargs = {}
    known = {f.name: f.type for f in fields(ClassifierCalibration)}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep or key not in known:
                raise ValueError(f"calibration line {lineno}: bad key {key!r}")
            if key == "profile_name":
                kwargs[key] = val
            elif key == "version":
                kwargs[key] = int(val)
            else:
                kwargs[key] = float(val)
    return ClassifierCalibration(**kwargs)


_DEFAULT_CALIBRATION: ClassifierCalibration | None = None


def default_calibration() -> ClassifierCalibration:
    global _DEFAULT_CALIBRATION
    if _DEFAULT_CALIBRATION is None:
        ref = importlib.resources.files("swarmbd") / "data" / "classifier_default.cal"
        with importlib.resources.as_file(ref) as path:
            _DEFAULT_CALIBRATION = load_calibration(path)
    return _DEFAULT_CALIBRATION


def behavior_features(traj: Trajectory, profile: SimProfile) -> dict:
    """Classifier inputs: window metrics plus trend/clearance statistics."""
    m = handcrafted_embed(traj, profile)
    sc = scatter_series(traj, profile)
    t1 = sc.shape[0]
    q = max(t1 // 4, 1)
    return {
        "avg_speed": m.avg_speed,
        "group_rotation_abs": abs(m.group_rotation),
        "radial_variance": m.radial_variance,
        "scatter": m.scatter,
        "scatter_first": float(sc[:q].mean()),
        "scatter_mid": float(sc[2 * q:3 * q].mean()),
        "scatter_final": float(sc[-max(t1 // 10, 1):].mean()),
        "wall_clearance": mean_wall_clearance(traj, profile),
    }


def classify_behavior(
    traj: Trajectory, profile: SimProfile, calibration: ClassifierCalibration | None = None
) -> str:
    """Deterministic decision list over the behavior features."""
    cal = calibration or default_calibration()
    f = behavior_features(traj, profile)
    gr = f["group_rotation_abs"]
    if (
        gr >= cal.rotation_high
        and f["radial_variance"] <= cal.radial_variance_cyclic_max
        and cal.scatter_cyclic_min <= f["scatter"] <= cal.scatter_cyclic_max
    ):
        return "cyclic_pursuit"
    if gr >= cal.rotation_high and f["radial_variance"] > cal.radial_variance_cyclic_max:
        return "milling"
    if (
        f["scatter_final"] <= cal.aggregation_final_max
        and f["scatter_final"] <= cal.aggregation_decay_ratio * f["scatter_first"]
    ):
        return "aggregation"
    if (
        f["scatter_final"] >= cal.dispersal_final_min
        and f["scatter_final"] >= cal.dispersal_growth_ratio * f["scatter_first"]
        and abs(f["scatter_final"] - f["scatter_mid"]) <= cal.dispersal_stable_tol * f["scatter_final"]
    ):
        return "dispersal"
    if f["wall_clearance"] <= cal.wall_clearance_max and f["avg_speed"] >= cal.wall_speed_min:
        return "wall_following"
    return "random"


def calibrate(
    profile: SimProfile,
    n_per_class: int = 12,
    seed: int = 7,
    steps: int | None = None,
    profile_name: str = "rsrs",
) -> ClassifierCalibration:
    """Derive thresholds from the synthetic generator suite.

    Separating thresholds are midpoints between the relevant class feature
    ranges; ratio/tolerance knobs are fixed by construction of the
    generators.
    """
    suite = make_labeled_suite(profile, n_per_class, seed, steps)
    feats: dict[str, list[dict]] = {lab: [] for lab in LABELS}
    for traj, label in suite:
        feats[label].append(behavior_features(traj, profile))

    def col(label, key):
        return np.array([f[key] for f in feats[label]])

    rotating = np.concatenate([col("cyclic_pursuit", "group_rotation_abs"),
                               col("milling", "group_rotation_abs")])
    non_rotating = np.concatenate(
        [col(lab, "group_rotation_abs")
         for lab in ("aggregation", "dispersal", "wall_following", "random")]
    )
    rotation_high = 0.5 * (non_rotating.max() + rotating.min())

    rv_mid = 0.5 * (col("cyclic_pursuit", "radial_variance").max()
                    + col("milling", "radial_variance").min())

    sc_cyc = col("cyclic_pursuit", "scatter")
    agg_final = col("aggregation", "scatter_final")
    others_final = np.concatenate(
        [col(lab, "scatter_final") for lab in ("dispersal", "wall_following", "random")]
    )
    agg_final_max = 0.5 * (agg_final.max() + others_final.min())

    disp_final = col("dispersal", "scatter_final")
    disp_final_min = 0.5 * (agg_final.max() + disp_final.min())

    wall_clear = col("wall_following", "wall_clearance")
    other_clear = np.concatenate(
        [col(lab, "wall_clearance") for lab in ("aggregation", "cyclic_pursuit", "milling", "random")]
    )
    wall_clearance_max = 0.5 * (wall_clear.max() + other_clear.min())

    wall_speed = col("wall_following", "avg_speed")
    still_speed = col("random", "avg_speed")
    wall_speed_min = 0.5 * (still_speed.max() + wall_speed.min())

    return ClassifierCalibration(
        rotation_high=float(rotation_high),
        radial_variance_cyclic_max=float(rv_mid),
        scatter_cyclic_min=float(0.5 * sc_cyc.min()),
        scatter_cyclic_max=float(1.5 * sc_cyc.max()),
        aggregation_final_max=float(agg_final_max),
        aggregation_decay_ratio=0.5,
        dispersal_final_min=float(disp_final_min),
        dispersal_growth_ratio=1.3,
        dispersal_stable_tol=0.10,
        wall_clearance_max=float(wall_clearance_max),
        wall_speed_min=float(wall_speed_min),
        profile_name=profile_name,
    )


def export_embeddings(source, path) -> int:
    """Write a tab-separated table: label (or generation), genome, vector.

    Floats are rendered with repr so a parse recovers them losslessly.
    Raises on empty input before creating the file; returns rows written.
    """
    rows = []
    if hasattr(source, "vectors"):   # NoveltyArchive
        if len(source) == 0:
            raise ValueError("archive is empty; nothing to export")
        gens = source.generations
        genomes = source.genomes
        vectors = source.vectors
        for i in range(len(source)):
            rows.append((str(int(gens[i])), genomes[i], vectors[i]))
    else:
        items = list(source)
        if not items:
            raise ValueError("labeled set is empty; nothing to export")
        for item in items:
            genome = item.genome if item.genome is not None else np.full(4, np.nan)
            rows.append((item.label, np.asarray(genome, dtype=np.float64), _vector_of(item)))
    with open(path, "w", encoding="utf-8") as fh:
        for head, genome, vec in rows:
            cols = [head] + [repr(float(v)) for v in genome] + [repr(float(v)) for v in vec]
            fh.write("\t".join(cols) + "\n")
    return len(rows)
