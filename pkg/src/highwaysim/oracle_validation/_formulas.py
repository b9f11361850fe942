"""IDM written out again, independent of :mod:`highwaysim.mobility_models`.

``same_order`` repeats the simulator's floating-point evaluation order exactly.
``reversed_order`` expands the products and subtracts the terms in another
order, which changes the rounding but not the mathematics.
"""

from math import sqrt

GAP_FLOOR = 0.01


def same_order(p, v, gap, dv):
    free = 1.0 - (v / p.desired_velocity) ** p.accel_exponent
    if gap is None:
        return p.max_acceleration * free
    s = gap if gap > GAP_FLOOR else GAP_FLOOR
    dynamic = v * p.time_headway + v * dv / (2.0 * sqrt(p.max_acceleration * p.comfortable_deceleration))
    if dynamic < 0.0:
        dynamic = 0.0
    s_star = p.min_gap + dynamic
    return p.max_acceleration * (free - (s_star / s) ** 2)


def reversed_order(p, v, gap, dv):
    a = p.max_acceleration
    free_loss = a * (v / p.desired_velocity) ** p.accel_exponent
    if gap is None:
        return a - free_loss
    s = gap if gap > GAP_FLOOR else GAP_FLOOR
    dynamic = v * dv / (2.0 * sqrt(a * p.comfortable_deceleration)) + p.time_headway * v
    if dynamic < 0.0:
        dynamic = 0.0
    s_star = dynamic + p.min_gap
    return (a - a * (s_star * s_star) / (s * s)) - free_loss
