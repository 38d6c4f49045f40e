"""Central finite-difference verification of analytic gradients.

``model_fn`` must be a deterministic closure over the parameter tensors
that rebuilds its forward pass on each call and returns a scalar loss
tensor. The checker runs it once under a fresh graph for the analytic
gradients, then perturbs each parameter element in place for the
two-sided numeric estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Graph

# Elements whose gradient magnitude sits below this floor are compared
# against it instead of their own size: the finite-difference estimate
# carries ~1e-9 absolute noise, which would otherwise dominate the
# relative error of near-zero gradients.
REL_FLOOR = 1e-4


@dataclass
class GradCheckReport:
    step: float
    tolerance: float
    passed: bool
    max_rel_error: dict[str, float] = field(default_factory=dict)
    worst: float = 0.0
    note: str | None = None

    def failures(self) -> list[str]:
        return [k for k, v in self.max_rel_error.items() if v > self.tolerance]


def finite_diff_check(model_fn, params: dict, tolerance: float,
                      step: float = 1e-5) -> GradCheckReport:
    """Compare analytic gradients of model_fn against central differences.

    Returns a report rather than raising: a non-finite loss is flagged in
    ``note`` with ``passed=False``.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")

    for p in params.values():
        p.grad = None
    with Graph() as g:
        loss = model_fn()
        if not np.isfinite(loss.values).all():
            return GradCheckReport(step, tolerance, passed=False, note="non-finite loss")
        g.backward(loss)
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.values))
        for name, p in params.items()
    }
    for p in params.values():
        p.grad = None

    report = GradCheckReport(step, tolerance, passed=True)
    for name, p in params.items():
        flat = p.values.reshape(-1)
        worst = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = float(model_fn().values.reshape(-1)[0])
            flat[i] = orig - step
            down = float(model_fn().values.reshape(-1)[0])
            flat[i] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                report.passed = False
                report.note = f"non-finite loss while perturbing {name}[{i}]"
                return report
            numeric = (up - down) / (2.0 * step)
            a = analytic[name].reshape(-1)[i]
            rel = abs(a - numeric) / max(abs(a), abs(numeric), REL_FLOOR)
            worst = max(worst, rel)
        report.max_rel_error[name] = worst
        report.worst = max(report.worst, worst)
    report.passed = report.worst <= tolerance
    return report
