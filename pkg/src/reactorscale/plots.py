"""Plot-ready two-column series."""

import os
from collections.abc import Mapping

import numpy as np

from reactorscale import io

# kind -> (x name, y name, units, extractor)
_SORPTION = {
    "velocity": ("t", "V_f", ("s", "m/s"), lambda s: (s.times, s.velocity)),
    "surface_A": ("t", "C_AS", ("s", "mol/m^3"), lambda s: (s.times, s.surface_A)),
    "product": ("t", "C_Efr", ("s", "mol/m^3"), lambda s: (s.times, s.surface_E)),
}
KINDS = (*_SORPTION, "spreading")


def _series(result, kind):
    from reactorscale.chemisorption import MovingPlaneSolution
    from reactorscale.packing import SpreadingSweep

    if kind in _SORPTION:
        if not isinstance(result, MovingPlaneSolution):
            raise ValueError(f"kind {kind!r} needs a MovingPlaneSolution, got {type(result).__name__}")
        xn, yn, units, get = _SORPTION[kind]
        x, y = get(result)
        return {None: (xn, yn, units, np.asarray(x), np.asarray(y))}
    if kind == "spreading":
        if not isinstance(result, SpreadingSweep):
            raise ValueError(f"kind 'spreading' needs a SpreadingSweep, got {type(result).__name__}")
        n = np.asarray(result.n_values, dtype=float)
        return {f"D_over_a_{k:g}": ("n", "H_s_over_h", ("", ""), n, v) for k, v in result.heights.items()}
    raise ValueError(f"unknown series kind {kind!r}; expected one of {KINDS}")


def emit_plot_series(result, kind, path):
    """
    Write (x, y) series for ``result``.

    ``result`` may be one result or a mapping label -> result; each series
    goes to its own file, ``<stem>_<label>.csv`` when labelled. Returns the
    written paths.
    """
    stem, ext = os.path.splitext(os.fspath(path))
    ext = ext or ".csv"
    items = result.items() if isinstance(result, Mapping) else [(None, result)]
    written = []
    for label, res in items:
        for sub, (xn, yn, units, x, y) in _series(res, kind).items():
            parts = [p for p in (label, sub) if p is not None]
            name = stem + "".join(f"_{p}" for p in parts) + ext
            written.append(io.write_csv(name, (xn, yn), np.column_stack([x, y]) if len(x) else [], units))
    if not written:
        xn, yn, units = _SORPTION[kind][:3] if kind in _SORPTION else ("n", "H_s_over_h", ("", ""))
        written.append(io.write_csv(stem + ext, (xn, yn), [], units))
    return written
