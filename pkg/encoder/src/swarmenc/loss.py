"""Normalized temperature-scaled cross-entropy over paired views.

Rows (2i, 2i+1) of the batch are the two views of sample i. Each anchor's
positive must win a softmax (cosine similarity / temperature) against every
other row in the batch; the loss is the mean over all 2N anchors.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F


def nt_xent(embeddings: torch.Tensor, temperature: float = 0.5) -> torch.Tensor:
    """Contrastive loss over a (2N, d) batch paired as (0,1), (2,3), ...

    Raises on zero vectors (cosine similarity undefined) and on odd or
    too-small batches.
    """
    if embeddings.dim() != 2 or embeddings.shape[0] < 2 or embeddings.shape[0] % 2:
        raise ValueError(f"need a (2N, d) batch with N >= 1, got {tuple(embeddings.shape)}")
    if temperature <= 0:
        raise ValueError(f"temperature must be > 0, got {temperature}")
    norms = embeddings.norm(dim=1)
    if bool((norms == 0).any()):
        raise ValueError("zero embedding vector: cosine similarity undefined")
    z = embeddings / norms[:, None]
    sim = (z @ z.T) / temperature
    n2 = embeddings.shape[0]
    sim.fill_diagonal_(float("-inf"))   # the k != i indicator
    targets = torch.arange(n2, device=embeddings.device) ^ 1   # partner row
    return F.cross_entropy(sim, targets)
