"""Order-flow price impact models: S-shape, linear and square-root."""

from ._core import (
    DomainError,
    Error,
    EstimationError,
    IntegrationError,
    ParseError,
    SimulationError,
    SShapeParams,
    bars_from_ticks,
    curvature_root,
    descriptives,
    estimate_ou,
    f_sshape,
    feasibility_margin,
    fit,
    g_sshape,
    impact_f,
    inflection_point,
    is_feasible,
    linear_alpha_from_ps,
    paired_t_test,
    run_cli,
    synth_panel,
)

__version__ = "0.1.0"


def fit_panel(panel, model="sshape", jobs=0):
    """Fit a panel dict as returned by synth_panel (bar 0 of each day dropped)."""
    r, x, xp = [], [], []
    for i in range(1, len(panel["x"])):
        if panel["day"][i] != panel["day"][i - 1]:
            continue
        r.append(panel["r"][i])
        x.append(panel["x"][i])
        xp.append(panel["x"][i - 1])
    return fit(r, x, xp, model=model, jobs=jobs)
