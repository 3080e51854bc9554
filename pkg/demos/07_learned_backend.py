"""Novelty search on a learned embedding served over the wire protocol.

Needs a running embedding server command, e.g. the encoder package:

    python demos/07_learned_backend.py "python -m swarmenc serve --checkpoint enc.pt"

Any program speaking protocol v1 on stdio works (host:port for TCP).
"""

import sys

from swarmbd import ControllerGenome, SearchConfig, get_profile, k_medoids, run_discovery, run_episode
from swarmbd.evaluate import classify_behavior
from swarmbd.protocol import EmbeddingEndpoint, EndpointBackend, EndpointSession

if len(sys.argv) < 2:
    sys.exit("usage: python 07_learned_backend.py '<server command or host:port>'")

profile = get_profile("rsrs")
with EndpointSession(EmbeddingEndpoint(sys.argv[1])) as session:
    print(f"handshake ok: embedding dim {session.embedding_dim}")
    backend = EndpointBackend(session)
    config = SearchConfig(population=10, generations=8, k_neighbors=10, seed=5, k_medoids=4)
    archive = run_discovery(profile, config, backend)
    print(f"archive of {len(archive)} learned representations (dim {archive.dim})")
    medoids, _ = k_medoids(archive.vectors, config.k_medoids)
    for rank, m in enumerate(medoids):
        traj = run_episode(ControllerGenome.from_array(archive.genomes[m]),
                           profile, int(archive.seeds[m]))
        print(f"  medoid {rank}: {classify_behavior(traj, profile)}")
