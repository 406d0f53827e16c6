"""Bootstrap evidence test for a mechanism change behind a vanished edge.

When a pooled edge X -> Y is independent inside one context value, two
stories fit: the mechanism of Y changed there, or the context merely
reshaped the support of (X, Z) so the dependence has nothing to show
itself on.  The null keeps the mechanism: estimate P(X, Z | ctx = r0) from
the r0 stratum and P(Y | X, Z) away from it, simulate K datasets of N rows
under that null, and measure how often the G-test would still have
rejected independence.  High simulated rejection power plus an observed
non-rejection in the real r0 stratum is evidence that the mechanism, not
the support, changed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .independence import CiQuery, g_test, g_test_from_tables
from .rng import derive_seed

__all__ = [
    "TransferError",
    "TransferConfig",
    "TransferVerdict",
    "transfer_evidence",
]


class TransferError(ValueError):
    """Invalid input to the transfer evidence test."""


@dataclass(frozen=True)
class TransferConfig:
    """Replication plan for the bootstrap null."""

    K: int
    N: int
    alpha: float
    seed: int
    min_power: float = 0.8

    def __post_init__(self) -> None:
        if self.K < 1:
            raise TransferError("K must be at least 1")
        if self.N < 1:
            raise TransferError("N must be at least 1")
        if not (0.0 < self.alpha < 1.0):
            raise TransferError("alpha must be in (0, 1)")
        if not (0.0 < self.min_power < 1.0):
            raise TransferError("min_power must be in (0, 1)")


@dataclass(frozen=True)
class TransferVerdict:
    """Outcome of the bootstrap: simulated power and the combined call."""

    estimated_power_under_null: float
    observed_independent_in_r0: bool
    evidence_physical: bool
    details: dict

    def __post_init__(self) -> None:
        want = (
            self.observed_independent_in_r0
            and self.estimated_power_under_null >= self.details["min_power"]
        )
        if self.evidence_physical != want:
            raise TransferError("verdict flags are inconsistent")


def _cell_ids(data: Dataset, cols: list[str], sizes: list[int]) -> np.ndarray:
    ids = np.zeros(data.n_rows, dtype=np.int64)
    for name, size in zip(cols, sizes):
        ids = ids * size + data.column(name)
    return ids


def transfer_evidence(
    data: Dataset,
    x: str,
    y: str,
    z: tuple[str, ...],
    r0: str,
    cfg: TransferConfig,
    context: str = "R",
    pooled_null: bool = False,
) -> TransferVerdict:
    """Evidence that the mechanism of y changed in the context value r0.

    The null mechanism P(y | x, z) is estimated from rows outside the r0
    stratum by default; `pooled_null` uses all rows instead.  (x, z) cells
    seen in the r0 stratum but absent from the estimation rows fall back to
    a uniform law over y, counted in details["unseen_cell_rows"].  Each
    replicate draws its contingency from an independently derived seed, so
    the replicate order never affects the outcome.
    """
    z = tuple(z)
    for name in (x, y, context, *z):
        if name not in data.columns:
            raise TransferError("unknown column %r" % (name,))
    if len({x, y, context}) != 3 or x in z or y in z or context in z:
        raise TransferError("x, y, the context, and z must not overlap")
    try:
        r0_code = data.code_of(context, r0)
    except Exception:
        raise TransferError(
            "r0 value %r is not a category of %r" % (r0, context)
        ) from None

    in_r0 = data.column(context) == r0_code
    if not in_r0.any():
        raise TransferError("no rows with %s=%s" % (context, r0))
    null_rows = np.ones(data.n_rows, dtype=bool) if pooled_null else ~in_r0
    if not null_rows.any():
        raise TransferError(
            "no rows outside %s=%s to estimate the null from" % (context, r0)
        )

    cols = [*z, x]
    sizes = [len(data.labels(c)) for c in cols]
    n_cells = int(np.prod(sizes))
    n_x = len(data.labels(x))
    n_y = len(data.labels(y))
    n_strata = n_cells // n_x
    ids = _cell_ids(data, cols, sizes)

    cell_counts = np.bincount(ids[in_r0], minlength=n_cells)
    p_cells = cell_counts / cell_counts.sum()
    y_counts = np.bincount(
        ids[null_rows] * n_y + data.column(y)[null_rows],
        minlength=n_cells * n_y,
    ).reshape(n_cells, n_y)
    totals = y_counts.sum(axis=1)
    law = np.full((n_cells, n_y), 1.0 / n_y)
    seen = totals > 0
    law[seen] = y_counts[seen] / totals[seen, None]
    fallback = (cell_counts > 0) & ~seen

    observed = g_test(
        data,
        CiQuery(x=x, y=y, z=z, regime=r0),
        alpha=cfg.alpha,
        context=context,
    )

    p_values = []
    unseen_rows = 0
    for k in range(cfg.K):
        rng = np.random.default_rng(derive_seed(cfg.seed, k))
        drawn = rng.multinomial(cfg.N, p_cells)
        unseen_rows += int(drawn[fallback].sum())
        table = np.zeros((n_cells, n_y), dtype=np.int64)
        for cell in np.flatnonzero(drawn):
            table[cell] = rng.multinomial(drawn[cell], law[cell])
        strata = table.reshape(n_strata, n_x, n_y)
        verdict = g_test_from_tables(strata, cfg.alpha)
        p_values.append(verdict.p_value)
    rejecting = sum(1 for p in p_values if p < cfg.alpha)
    power = rejecting / cfg.K

    details = {
        "per_replicate_p_values": tuple(p_values),
        "rejecting_replicates": rejecting,
        "unseen_cell_rows": unseen_rows,
        "observed_p_value": observed.p_value,
        "observed_warning": observed.warning,
        "r0_stratum_rows": int(in_r0.sum()),
        "null_rows": int(null_rows.sum()),
        "null_source": "pooled" if pooled_null else "off_context",
        "min_power": cfg.min_power,
    }
    return TransferVerdict(
        estimated_power_under_null=power,
        observed_independent_in_r0=observed.independent,
        evidence_physical=observed.independent and power >= cfg.min_power,
        details=details,
    )
