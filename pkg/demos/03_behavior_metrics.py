"""The hand-crafted behavior space.

Embeds closed-form reference behaviors and a few simulated controllers into
the 5-d metric space (average speed, angular momentum, radial variance,
scatter, group rotation) and looks at the distances between them.
"""

from swarmbd import ControllerGenome, behavior_distance, get_profile, handcrafted_embed, run_episode
from swarmbd.synthetic import (
    make_aggregation,
    make_cyclic_pursuit,
    make_dispersal,
    make_random_still,
)

profile = get_profile("rsrs")

references = {
    "cyclic_pursuit": make_cyclic_pursuit(profile, seed=1),
    "aggregation": make_aggregation(profile, seed=1),
    "dispersal": make_dispersal(profile, seed=1),
    "random_still": make_random_still(profile, seed=1),
}

print(f"{'behavior':16s} {'speed':>7s} {'ang.mom':>8s} {'rad.var':>8s} {'scatter':>8s} {'rotation':>9s}")
vectors = {}
for name, traj in references.items():
    m = handcrafted_embed(traj, profile)
    vectors[name] = m.as_vector()
    print(f"{name:16s} {m.avg_speed:7.3f} {m.angular_momentum:8.3f} "
          f"{m.radial_variance:8.4f} {m.scatter:8.4f} {m.group_rotation:9.3f}")

print("\npairwise distances between the references:")
names = list(vectors)
for i, a in enumerate(names):
    for b in names[i + 1:]:
        print(f"  {a:16s} <-> {b:16s} {behavior_distance(vectors[a], vectors[b]):.3f}")

print("\nand two actual controllers:")
for genome in (ControllerGenome(0.09, 0.0, 0.09, 0.0), ControllerGenome(0.0, 0.0, 0.0, 0.0)):
    traj = run_episode(genome, profile, seed=3)
    m = handcrafted_embed(traj, profile)
    print(f"  genome {genome}: speed={m.avg_speed:.3f} scatter={m.scatter:.3f}")
