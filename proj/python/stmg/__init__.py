"""Space-time multigrid solver for heat and acoustic wave equations.

Thin wrapper around the compiled ``_stmg`` module: configurations are plain
dicts following the same flat JSON schema as the command-line tool, reports
come back as dicts.
"""

import json as _json

try:  # installed layout: stmg/_stmg.so
    from . import _stmg as _core
except ImportError:  # build-tree layout: _stmg.so on sys.path
    import _stmg as _core

__all__ = ["temporal_weights", "solve", "convergence"]


def temporal_weights(scheme, k):
    """Temporal weight matrices of DG(k) or CGP(k) on the unit interval."""
    return _core.temporal_weights(scheme, k)


def solve(config=None, **overrides):
    """Run a single solve; returns the report dict (one entry in 'runs')."""
    cfg = dict(config or {})
    cfg.update(overrides)
    return _json.loads(_core.solve_json(_json.dumps(cfg)))


def convergence(config=None, **overrides):
    """Run a refinement study over r_min..r_max; returns the report dict."""
    cfg = dict(config or {})
    cfg.update(overrides)
    return _json.loads(_core.convergence_json(_json.dumps(cfg)))
