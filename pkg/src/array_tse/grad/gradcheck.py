"""Central-finite-difference oracle for backward implementations."""

import numpy as np

from .tensor import Tensor, backward, no_grad


def grad_check(f, point, eps=1e-3):
    """Max relative error between reverse-mode and central-difference gradients.

    `f` maps the given leaf tensor(s) to a scalar Tensor. `point` is one Tensor
    or a list of Tensors; each is re-created in float64 with requires_grad so
    the same graph can be rebuilt per evaluation. Error per coordinate is
    |g_ad - g_fd| / max(1, |g_fd|).
    """
    if not 1e-5 <= eps <= 1e-2:
        raise ValueError(f"grad_check: eps {eps} outside [1e-5, 1e-2]")
    single = isinstance(point, Tensor)
    points = [point] if single else list(point)
    leaves = [Tensor(p.data.astype(np.float64), requires_grad=True) for p in points]

    def run():
        out = f(leaves[0]) if single else f(*leaves)
        if out.size != 1:
            raise ValueError("grad_check: f must be scalar-valued")
        if not np.isfinite(out.data).all():
            raise FloatingPointError("grad_check: non-finite output")
        return out

    loss = run()
    backward(loss)
    ad_grads = [np.zeros_like(l.data) if l.grad is None else l.grad.copy() for l in leaves]

    worst = 0.0
    for leaf, g_ad in zip(leaves, ad_grads):
        flat = leaf.data.reshape(-1)
        g_flat = g_ad.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            with no_grad():
                flat[i] = orig + eps
                hi = float(run().data)
                flat[i] = orig - eps
                lo = float(run().data)
            flat[i] = orig
            g_fd = (hi - lo) / (2.0 * eps)
            if not np.isfinite(g_fd):
                raise FloatingPointError("grad_check: non-finite finite-difference value")
            err = abs(g_flat[i] - g_fd) / max(1.0, abs(g_fd))
            worst = max(worst, err)
    return worst
