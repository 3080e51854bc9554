"""Rasterize episodes and build a small training corpus.

Shows the 3-channel frame stack drawn from the converged second half of an
episode, writes PGM images you can open in any viewer, and generates a
dataset file with streamed reading.
"""

import os
import tempfile

import numpy as np

from swarmbd import ControllerGenome, get_profile, run_episode
from swarmbd.dataset import generate_dataset, iter_dataset
from swarmbd.render import subsample, write_pgm

profile = get_profile("rsrs")
traj = run_episode(ControllerGenome(0.06, -0.3, 0.0, 1.2), profile, seed=7)

stack = subsample(traj)   # (3, 64, 64), steps 300/450/599 of a 600-step run
print("frame stack channels:", stack.channels.shape, "from steps", stack.step_indices)
print("nonzero pixels per channel:", [(c > 0).sum() for c in stack.channels])

out_dir = tempfile.mkdtemp(prefix="swarmbd_frames_")
for idx, frame in zip(stack.step_indices, stack.channels):
    write_pgm(frame, os.path.join(out_dir, f"step{idx}.pgm"))
print("PGM frames written to", out_dir)

corpus = os.path.join(out_dir, "corpus.swbd")
summary = generate_dataset(n=50, profile=profile, seed=1, path=corpus)
print("\ngenerated:", summary)

speeds = []
for rec in iter_dataset(corpus):   # streaming: one record in memory at a time
    speeds.append(float(np.abs(rec.genome[0])))
print(f"mean |u_v0| over the sampled controllers: {np.mean(speeds):.4f} "
      f"(uniform over [-{profile.v_max}, {profile.v_max}] -> expect ~{profile.v_max/2:.3f})")
