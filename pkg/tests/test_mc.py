import numpy as np
import pytest

from rankmaxsum.dgp import CovarianceSpec, SignalSpec
from rankmaxsum.mc import (
    ExperimentConfig,
    ReplicateError,
    joint_tail,
    replicate_streams,
    run_independence_diag,
    run_power,
    run_size,
)
from rankmaxsum.model import ALL_METHODS, DomainError, DimensionError


def small(**kw):
    base = dict(n=20, p=12, covariance=CovarianceSpec(p=12), replications=12, seed=5,
                bootstrap_B=200, perm_B=100, cv_splits=5)
    base.update(kw)
    return ExperimentConfig(**base)


def test_streams_reproducible_and_distinct():
    a = replicate_streams(3, (1, 0, 0, 7))
    b = replicate_streams(3, (1, 0, 0, 7))
    c = replicate_streams(3, (1, 0, 0, 8))
    assert a["data"].random() == b["data"].random()
    assert a["boot"].random() != c["boot"].random()
    assert a["data"].random() != a["perm"].random()


def test_size_table_shape_and_determinism():
    t1 = run_size(small())
    t2 = run_size(small())
    assert t1.to_records() == t2.to_records()
    assert [r.method for r in t1.rows] == [m.value for m in ALL_METHODS]
    for row in t1.rows:
        assert 0 <= row.rejections <= row.replications == 12
        assert 0.0 <= row.frequency <= 1.0


def test_worker_invariance():
    cfg = small(replications=9)
    assert run_size(cfg, workers=1).to_records() == run_size(cfg, workers=3).to_records()


def test_seed_changes_results():
    cfg = small(methods=("RS",), replications=30)
    a = run_independence_diag(cfg).t_rs
    b = run_independence_diag(small(methods=("RS",), replications=30, seed=6)).t_rs
    assert not np.array_equal(a, b)


def test_power_grid():
    cfg = small(signal=SignalSpec("dense_random"), methods=("RS", "RM1", "RC1"), replications=6)
    table = run_power(cfg, grid=(0, 1, 5))
    assert len(table.rows) == 9
    assert table.lookup("RS", size=5).cell["design"] == "dense_random"


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
def test_alpha_validation(alpha):
    with pytest.raises(DomainError):
        small(alpha=alpha)


def test_config_validation():
    with pytest.raises(DomainError):
        small(replications=0)
    with pytest.raises(DomainError):
        small(p=13)


def test_replicate_error_carries_index():
    cfg = ExperimentConfig(n=6, p=4, covariance=CovarianceSpec(p=4), methods=("RM2",),
                           replications=2, seed=0)
    with pytest.raises(ReplicateError) as info:
        run_size(cfg)
    assert info.value.replicate == 0
    assert isinstance(info.value.__cause__, DimensionError)


def test_null_design_required():
    with pytest.raises(DomainError):
        run_size(small(signal=SignalSpec("dense_random", size=1)))


def test_joint_tail_counts():
    a = np.arange(100.0)
    table, joint = joint_tail(a, a)
    assert table == ((90, 0), (0, 10))
    assert joint == 0.10
    table, joint = joint_tail(a, -a)
    assert joint == 0.0


def test_format_text():
    text = run_size(small(methods=("RS", "MAX"), replications=4)).format_text()
    assert "RS" in text and "MAX" in text
