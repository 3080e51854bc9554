"""Desk-scale novelty search over the controller space.

Evolves controllers whose only fitness is being far (in behavior space) from
everything seen so far, then clusters the archive with k-medoids and labels
the representatives with the heuristic classifier.
"""

import numpy as np

from swarmbd import ControllerGenome, SearchConfig, get_profile, k_medoids, run_discovery, run_episode
from swarmbd.evaluate import classify_behavior
from swarmbd.metrics import MetricsBackend

profile = get_profile("rsrs")
config = SearchConfig(population=20, generations=25, k_neighbors=15, seed=1, k_medoids=6)

archive = run_discovery(profile, config, MetricsBackend())
print(f"archive: {len(archive)} representations "
      f"({config.population} genomes x {config.generations} generations)")

nov = archive.novelty_at_insertion
by_gen = nov.reshape(config.generations, config.population).mean(axis=1)
print("mean selection novelty by generation (novelty decays as space fills):")
print(np.array2string(by_gen, precision=4))

medoids, assignments = k_medoids(archive.vectors, config.k_medoids)
print("\nrepresentative behaviors:")
for rank, m in enumerate(medoids):
    genome = ControllerGenome.from_array(archive.genomes[m])
    traj = run_episode(genome, profile, int(archive.seeds[m]))
    label = classify_behavior(traj, profile)
    size = int((assignments == rank).sum())
    print(f"  medoid {rank} (cluster of {size:3d}): gen {archive.generations[m]:2d} "
          f"genome=({genome.u_v0:+.3f}, {genome.u_w0:+.3f}, {genome.u_v1:+.3f}, "
          f"{genome.u_w1:+.3f}) -> {label}")
