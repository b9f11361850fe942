"""Stand-alone single-lane platoon integrator used as an oracle for the highway loop."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from . import _formulas

Sample = Tuple[float, float, float, float]  # (t, x, v, a)


@dataclass
class OracleTrajectory:
    delta_t: float
    trajectories: Dict[int, List[Sample]] = field(default_factory=dict)

    def final(self, vehicle_id: int) -> Sample:
        return self.trajectories[vehicle_id][-1]


def oracle_platoon(params: Sequence, initial: Sequence[Tuple[float, float]], delta_t: float, steps: int, *,
                   lengths: Optional[Sequence[float]] = None, ids: Optional[Sequence[int]] = None,
                   perturbed: bool = False,
                   forced: Optional[Mapping[int, Callable[[float], Optional[float]]]] = None) -> OracleTrajectory:
    """Integrate a one-lane platoon with semi-implicit Euler.

    Args:
        params: IDM parameter set per vehicle.
        initial: (rear x, velocity) per vehicle, same order as ``params``.
        delta_t: step length [s].
        steps: number of steps.
        lengths: vehicle lengths, default 4.5 m each.
        ids: vehicle ids, default 1..n.
        perturbed: evaluate IDM with the reordered arithmetic.
        forced: vehicle id -> f(t) returning an acceleration that replaces the
            model output for that step, or None to use the model.

    Every vehicle reacts to its leader's state at the start of the step.
    """
    n = len(params)
    lengths = list(lengths) if lengths is not None else [4.5] * n
    ids = list(ids) if ids is not None else list(range(1, n + 1))
    accel = _formulas.reversed_order if perturbed else _formulas.same_order
    forced = forced or {}
    x = [float(s[0]) for s in initial]
    v = [float(s[1]) for s in initial]
    a = [0.0] * n
    order = sorted(range(n), key=lambda i: x[i])
    out = OracleTrajectory(delta_t, {vid: [(0.0, x[i], v[i], a[i])] for i, vid in enumerate(ids)})

    for k in range(steps):
        t = k * delta_t
        new_a = [0.0] * n
        for rank, i in enumerate(order):
            override = forced[ids[i]](t) if ids[i] in forced else None
            if override is not None:
                new_a[i] = override
            elif rank + 1 < n:
                j = order[rank + 1]
                new_a[i] = accel(params[i], v[i], x[j] - (x[i] + lengths[i]), v[i] - v[j])
            else:
                new_a[i] = accel(params[i], v[i], None, 0.0)
        for i in range(n):
            vi = v[i] + new_a[i] * delta_t
            if vi < 0.0:
                new_a[i] = -v[i] / delta_t
                vi = 0.0
            a[i] = new_a[i]
            v[i] = vi
            x[i] = x[i] + vi * delta_t
        t_next = (k + 1) * delta_t
        for i, vid in enumerate(ids):
            out.trajectories[vid].append((t_next, x[i], v[i], a[i]))
    return out
