import numpy as np
import pytest

from csi_graphlab.corpus import get_example
from csi_graphlab.data import Dataset
from csi_graphlab.exact import draw_samples
from csi_graphlab.transfer import (
    TransferConfig,
    TransferError,
    TransferVerdict,
    transfer_evidence,
)


def fixture_samples(name, n=4000, seed=7):
    return draw_samples(get_example(name), n, seed=seed)


def run(data, r0="0", context="C", **cfg_kw):
    defaults = dict(K=200, N=2000, alpha=0.05, seed=7)
    defaults.update(cfg_kw)
    cfg = TransferConfig(**defaults)
    return transfer_evidence(data, "X", "Y", (), r0, cfg, context=context)


def test_changed_mechanism_with_overlap_gives_evidence():
    data = fixture_samples("fig1-change-overlap")
    n0 = int((data.column("C") == data.code_of("C", "0")).sum())
    verdict = run(data, N=n0)
    assert verdict.observed_independent_in_r0
    assert verdict.estimated_power_under_null >= 0.9
    assert verdict.evidence_physical
    assert verdict.details["unseen_cell_rows"] == 0


def test_unchanged_gated_mechanism_gives_no_evidence():
    data = fixture_samples("fig1-nochange-gated")
    n0 = int((data.column("C") == data.code_of("C", "0")).sum())
    verdict = run(data, N=n0)
    assert verdict.estimated_power_under_null < 0.5
    assert not verdict.evidence_physical


def test_single_x_value_in_r0_stratum_is_powerless():
    rows = []
    rng = np.random.default_rng(3)
    for _ in range(800):
        rows.append(("0", "a", str(rng.integers(2))))
    for _ in range(800):
        x = int(rng.integers(2))
        noisy = x if rng.random() < 0.9 else 1 - x
        rows.append(("1", "ab"[x], str(noisy)))
    data = Dataset.from_rows(["R", "X", "Y"], rows)
    verdict = run(data, context="R", K=100, N=800)
    assert verdict.estimated_power_under_null <= 0.05 + 0.03
    assert not verdict.evidence_physical


def test_unseen_cell_falls_back_to_uniform_and_counts():
    rows = []
    rng = np.random.default_rng(5)
    for _ in range(400):
        rows.append(("0", "c", str(rng.integers(2))))
        rows.append(("0", "a", str(rng.integers(2))))
    for _ in range(800):
        x = int(rng.integers(2))
        rows.append(("1", "ab"[x], str(x)))
    data = Dataset.from_rows(["R", "X", "Y"], rows)
    verdict = run(data, context="R", K=20, N=400)
    assert verdict.details["unseen_cell_rows"] > 0


def test_replicates_are_seed_deterministic():
    data = fixture_samples("fig1-change-overlap", n=1500)
    a = run(data, K=25, N=500)
    b = run(data, K=25, N=500)
    assert a.details["per_replicate_p_values"] == b.details["per_replicate_p_values"]
    assert a.estimated_power_under_null == b.estimated_power_under_null
    c = run(data, K=25, N=500, seed=8)
    assert c.details["per_replicate_p_values"] != a.details["per_replicate_p_values"]


def test_power_does_not_drop_with_more_rows():
    data = fixture_samples("fig1-change-overlap", n=1500)
    small = run(data, K=50, N=120)
    large = run(data, K=50, N=1200)
    assert small.estimated_power_under_null <= (
        large.estimated_power_under_null + 0.02
    )


def test_pooled_null_flag():
    data = fixture_samples("fig1-change-overlap", n=1500)
    verdict = run(data, K=10, N=200)
    assert verdict.details["null_source"] == "off_context"
    pooled = transfer_evidence(
        data, "X", "Y", (), "0",
        TransferConfig(K=10, N=200, alpha=0.05, seed=7),
        context="C", pooled_null=True,
    )
    assert pooled.details["null_source"] == "pooled"
    # Pooling mixes the changed r0 rows into the null, diluting its signal.
    assert pooled.details["null_rows"] == data.n_rows


def test_single_context_data_needs_the_pooled_flag():
    rows = [("0", str(i % 2), str((i // 2) % 2)) for i in range(200)]
    data = Dataset.from_rows(["R", "X", "Y"], rows)
    with pytest.raises(TransferError, match="outside"):
        run(data, context="R", K=5, N=50)
    verdict = transfer_evidence(
        data, "X", "Y", (), "0",
        TransferConfig(K=5, N=50, alpha=0.05, seed=1),
        context="R", pooled_null=True,
    )
    assert verdict.details["null_rows"] == 200


def test_input_validation():
    data = fixture_samples("fig1-change-overlap", n=300)
    cfg = TransferConfig(K=2, N=50, alpha=0.05, seed=1)
    with pytest.raises(TransferError, match="unknown column"):
        transfer_evidence(data, "Q", "Y", (), "0", cfg, context="C")
    with pytest.raises(TransferError, match="overlap"):
        transfer_evidence(data, "X", "X", (), "0", cfg, context="C")
    with pytest.raises(TransferError, match="overlap"):
        transfer_evidence(data, "X", "Y", ("X",), "0", cfg, context="C")
    with pytest.raises(TransferError, match="category"):
        transfer_evidence(data, "X", "Y", (), "9", cfg, context="C")
    empty_r0 = Dataset.from_rows(
        ["C", "X", "Y"],
        [("1", "0", "0"), ("1", "1", "1")],
        categories={"C": ("0", "1"), "X": ("0", "1"), "Y": ("0", "1")},
    )
    with pytest.raises(TransferError, match="no rows"):
        transfer_evidence(empty_r0, "X", "Y", (), "0", cfg, context="C")


def test_config_validation():
    with pytest.raises(TransferError, match="K"):
        TransferConfig(K=0, N=10, alpha=0.05, seed=1)
    with pytest.raises(TransferError, match="N"):
        TransferConfig(K=1, N=0, alpha=0.05, seed=1)
    with pytest.raises(TransferError, match="alpha"):
        TransferConfig(K=1, N=10, alpha=1.5, seed=1)
    with pytest.raises(TransferError, match="min_power"):
        TransferConfig(K=1, N=10, alpha=0.05, seed=1, min_power=0.0)


def test_verdict_consistency_is_enforced():
    with pytest.raises(TransferError, match="inconsistent"):
        TransferVerdict(
            estimated_power_under_null=0.2,
            observed_independent_in_r0=True,
            evidence_physical=True,
            details={"min_power": 0.8},
        )


def test_conditioning_set_is_respected():
    # Z carries the whole X-Y association, so conditioning on it leaves the
    # null simulation without signal and power stays near the test level.
    rows = []
    rng = np.random.default_rng(11)
    for i in range(2400):
        ctx = "0" if i % 2 else "1"
        zv = int(rng.integers(2))
        x = zv if rng.random() < 0.95 else 1 - zv
        yv = zv if rng.random() < 0.95 else 1 - zv
        rows.append((ctx, str(x), str(yv), str(zv)))
    data = Dataset.from_rows(["R", "X", "Y", "Z"], rows)
    cfg = TransferConfig(K=60, N=1200, alpha=0.05, seed=2)
    with_z = transfer_evidence(data, "X", "Y", ("Z",), "0", cfg, context="R")
    without_z = transfer_evidence(data, "X", "Y", (), "0", cfg, context="R")
    assert with_z.estimated_power_under_null <= 0.15
    assert without_z.estimated_power_under_null >= 0.9
