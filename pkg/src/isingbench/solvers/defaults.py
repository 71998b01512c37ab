"""Tuned parameter sets per solver and lattice size.

Sim-CIM, OEO-CIM and the step budgets of GD, SBM, Hopfield and SA are the
published square-lattice optima. OPO-CIM and OIM constants are local choices
tuned on small planted lattices (see the decisions ledger).
"""
from __future__ import annotations

from ..schedules import ScheduleSpec
from .base import SolverParams

# L: (alpha0, alpha1, beta, x_sat, sigma_g, N_t)
SIM_CIM_TABLE = {
    4: (0.7, 1.0, 0.2, 3.0, 0.1, 1000),
    6: (0.7, 1.0, 0.2, 3.0, 0.1, 1000),
    8: (0.6, 1.5, 0.2, 3.0, 0.1, 1000),
    10: (0.6, 1.5, 0.2, 3.0, 0.1, 1000),
    12: (0.6, 1.5, 0.2, 3.0, 0.1, 1000),
    14: (0.6, 1.5, 0.2, 3.0, 0.1, 1000),
    16: (0.6, 1.5, 0.2, 5.0, 0.2, 1000),
    18: (0.6, 2.0, 0.2, 5.0, 0.2, 1000),
    20: (0.6, 2.5, 0.2, 5.0, 0.2, 1000),
}

# L: (alpha0, alpha1, beta, sigma_g, N_t)
OEO_CIM_TABLE = {
    4: (0.45, 2.0, 0.29, 0.1, 2 ** 6),
    6: (0.45, 3.5, 0.29, 0.1, 2 ** 6),
    8: (0.45, 5.0, 0.29, 0.1, 2 ** 7),
    10: (0.45, 5.0, 0.29, 0.1, 2 ** 7),
    12: (0.45, 5.0, 0.29, 0.2, 2 ** 8),
    14: (0.45, 5.0, 0.29, 0.2, 2 ** 8),
    16: (0.45, 5.0, 0.29, 0.2, 2 ** 9),
    18: (0.45, 9.0, 0.29, 0.2, 2 ** 9),
}

LATTICE_SIZES = (4, 6, 8, 10, 12, 14, 16, 18, 20)

# log2 of N_t per lattice size; None where no optimum was reported.
STEP_EXPONENTS = {
    "sa": (2, 4, 4, 9, 9, 10, 10, 13, 13),
    "gd": (6, 7, 8, 9, 10, 10, 12, 14, 14),
    "sbm": (5, 7, 7, 8, 8, 8, 9, 9, 10),
    "hopfield": (5, 7, 7, 8, 8, 8, 9, 9, 10),
    "hopfield-rk4": (5, 5, 6, 6, 6, 7, 8, None, None),
    "hopfield-rk45": (8, 9, 10, 10, 10, 10, 11, None, None),
}

SA_BETA_FINAL = 3.0
GD_PUMP = (0.5, 10.0)
GD_BETA = 1.0
GD_SIGMA = 0.2
GD_DT = 0.5
SBM_DT = 0.5
HOPFIELD_ZETA = (10.0, 0.8)
HOPFIELD_DT = 0.5
HOPFIELD_SIGMA = 0.1
OIM_DT = 0.02
OIM_STEPS = 1000

# Locally tuned constants.
OPO_CIM = {"alpha0": 1.0, "alpha1": 3.0, "beta": 0.2, "sigma": 0.05, "dt": 0.1, "n_steps": 256}
OIM = {"alpha_max": 1.0, "period": 200.0, "beta": 1.0, "sigma": 0.05}

DEFAULT_KINDS = ("sim-cim", "oeo-cim", "opo-cim", "oim", "gd", "sbm", "hopfield",
                 "hopfield-rk4", "hopfield-rk45", "hopfield-discrete", "sa")


def _nearest(table_keys, L: int) -> int:
    keys = sorted(table_keys)
    return min(keys, key=lambda k: (abs(k - L), k))


def steps_for(name: str, L: int) -> int:
    """Tabulated step budget, using the nearest listed size when L is off-grid."""
    exps = STEP_EXPONENTS[name]
    listed = [size for size, e in zip(LATTICE_SIZES, exps) if e is not None]
    size = _nearest(listed, L)
    return 2 ** exps[LATTICE_SIZES.index(size)]


def default_params(kind: str, L: int = 4) -> SolverParams:
    """Default SolverParams for a solver on an L x L lattice.

    ``kind`` is a solver id or one of the Hopfield integrator aliases
    ``hopfield-rk4`` / ``hopfield-rk45``.
    """
    const = ScheduleSpec.constant
    if kind == "sim-cim":
        a0, a1, beta, x_sat, sigma, n_t = SIM_CIM_TABLE[_nearest(SIM_CIM_TABLE, L)]
        return SolverParams(kind, n_t, schedules={
            "pump": ScheduleSpec.tanh_ramp(a0, a1), "coupling": const(beta), "noise": const(sigma),
        }, extras={"x_sat": x_sat})
    if kind == "oeo-cim":
        a0, a1, beta, sigma, n_t = OEO_CIM_TABLE[_nearest(OEO_CIM_TABLE, L)]
        return SolverParams(kind, n_t, schedules={
            "pump": ScheduleSpec.tanh_ramp(a0, a1), "coupling": const(beta), "noise": const(sigma),
        })
    if kind == "opo-cim":
        p = OPO_CIM
        return SolverParams(kind, p["n_steps"], dt=p["dt"], schedules={
            "pump": ScheduleSpec.tanh_ramp(p["alpha0"], p["alpha1"]), "coupling": const(p["beta"]),
            "noise": const(p["sigma"]),
        })
    if kind == "oim":
        p = OIM
        return SolverParams(kind, OIM_STEPS, dt=OIM_DT, schedules={
            "pump": ScheduleSpec.periodic_square(0.0, p["alpha_max"], p["period"]),
            "coupling": const(p["beta"]), "noise": const(p["sigma"]),
        })
    if kind == "gd":
        return SolverParams(kind, steps_for("gd", L), dt=GD_DT, schedules={
            "pump": ScheduleSpec.tanh_ramp(*GD_PUMP), "coupling": const(GD_BETA), "noise": const(GD_SIGMA),
        })
    if kind == "sbm":
        return SolverParams(kind, steps_for("sbm", L), dt=SBM_DT, integrator="symplectic",
                            schedules={"pump": ScheduleSpec.linear(1.0)})
    if kind in ("hopfield", "hopfield-rk4", "hopfield-rk45"):
        # zeta decay and noise are per unit time, so every integrator follows the same SDE
        dt = HOPFIELD_DT if kind == "hopfield" else 1.0
        integ = "euler" if kind == "hopfield" else kind.split("-")[1]
        start, decay = HOPFIELD_ZETA
        schedules = {"pump": const(1.0), "coupling": const(1.0), "noise": const(HOPFIELD_SIGMA),
                     "activation": ScheduleSpec.geometric(start, decay ** dt)}
        return SolverParams("hopfield", steps_for(kind, L), dt=dt, integrator=integ, eps=1.0,
                            noise_scaling="sqrt-dt", schedules=schedules)
    if kind == "hopfield-discrete":
        return SolverParams(kind, steps_for("hopfield", L))
    if kind == "sa":
        return SolverParams(kind, steps_for("sa", L),
                            schedules={"temperature": ScheduleSpec.inverse_linear_beta(SA_BETA_FINAL)})
    raise ValueError(f"no defaults for {kind!r}; expected one of {DEFAULT_KINDS}")
