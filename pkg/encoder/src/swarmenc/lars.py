"""Layer-wise adaptive rate scaling on top of momentum SGD.

Each parameter's step is scaled by trust = eta * ||w|| / ||g + wd*w||, which
keeps large-batch updates proportionate per layer. Parameters with zero
weight or gradient norm fall back to trust = 1.
"""

from __future__ import annotations

import torch


class LARS(torch.optim.Optimizer):
    def __init__(self, params, lr: float, momentum: float = 0.9,
                 weight_decay: float = 0.0, eta: float = 0.001, eps: float = 1e-9):
        if lr <= 0:
            raise ValueError(f"lr must be > 0, got {lr}")
        defaults = dict(lr=lr, momentum=momentum, weight_decay=weight_decay,
                        eta=eta, eps=eps)
        super().__init__(params, defaults)

    @torch.no_grad()
    def step(self, closure=None):
        loss = None
        if closure is not None:
            with torch.enable_grad():
                loss = closure()
        for group in self.param_groups:
            for p in group["params"]:
                if p.grad is None:
                    continue
                g = p.grad
                if group["weight_decay"]:
                    g = g.add(p, alpha=group["weight_decay"])
                w_norm = torch.norm(p)
                g_norm = torch.norm(g)
                if w_norm > 0 and g_norm > 0:
                    trust = group["eta"] * w_norm / (g_norm + group["eps"])
                else:
                    trust = torch.ones((), device=p.device)
                update = g * (trust * group["lr"])
                buf = self.state[p].get("momentum_buffer")
                if buf is None:
                    buf = torch.zeros_like(p)
                    self.state[p]["momentum_buffer"] = buf
                buf.mul_(group["momentum"]).add_(update)
                p.sub_(buf)
        return loss
