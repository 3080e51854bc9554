"""Scoring a representation with triplet confusion matrices.

Uses the closed-form generator suite as labeled ground truth and asks: how
often does an anchor embed closer to a same-class example than to an
other-class one? Diagonal = within-class success pooled over all negatives.
"""

import tempfile

from swarmbd import get_profile, handcrafted_embed
from swarmbd.evaluate import LabeledBehavior, export_embeddings, triplet_confusion
from swarmbd.synthetic import make_labeled_suite

profile = get_profile("rsrs")
suite = make_labeled_suite(profile, n_per_class=10, seed=31)
labeled = [
    LabeledBehavior(label, handcrafted_embed(traj, profile).as_vector().values)
    for traj, label in suite
]

matrix = triplet_confusion(labeled)
print("hand-crafted representation, generator suite:")
print(matrix.to_text())

path = tempfile.mktemp(suffix=".tsv")
export_embeddings(labeled, path)
print(f"embeddings exported for external plotting (e.g. t-SNE): {path}")
