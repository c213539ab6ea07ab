import json
import math

import pytest

import varq


def test_vq_alternating_path():
    value, chain = varq.vq([[0], [1], [0], [1]], 2.0)
    assert value == pytest.approx(math.sqrt(3), rel=1e-15)
    assert chain == [0, 1, 2, 3]
    assert varq.vq_bruteforce([[0], [1], [0], [1]], 2.0)[0] == value


def test_vq_rejects_bad_exponent():
    with pytest.raises(varq.VarqError):
        varq.vq([[0], [1]], 0.5)
    with pytest.raises(ValueError):
        varq.vq([[0], [1]], 0.5)


def test_poisson_anchor():
    f = {"breakpoints": [-1, 1], "values": [[1]]}
    assert varq.evaluate("poisson", f, 1.0, 0.0)[0] == pytest.approx(0.5, abs=1e-15)


def test_witness_ratio():
    ratio, num, den = varq.cotype_ratio(varq.witness_linfty(4, 4), 3.0)
    assert (ratio, num, den) == (4.0, 4.0, 1.0)


def test_estimate_is_deterministic():
    config = {
        "id": "py",
        "space": {"dim": 1, "norm": "l2"},
        "family": "average",
        "scales": {"geometric": {"min": 0.25, "max": 2, "count": 5}},
        "corpus": {"count": 2, "seed": 1},
        "optimizer": {"restarts": 1, "iterations": 3, "seed": 2},
        "spatial": {"points_per_unit": 16, "richardson_gate": 0.05},
    }
    a, b = varq.estimate(config), varq.estimate(config)
    assert a == b
    assert a["estimate"] > 0
    assert varq.structured_report([a], config) == varq.structured_report([b], config)


def test_missing_seed_is_an_error():
    with pytest.raises(varq.VarqError):
        varq.estimate({"space": {"dim": 1, "norm": "l2"}, "corpus": {"count": 1}, "optimizer": {}})


def test_identity_suite_and_control():
    rows = varq.identity_suite(5, triples=8)
    assert all(r["status"] == "PASS" for r in rows)
    assert any(r["status"] == "FAIL" for r in varq.identity_suite(5, triples=8, corrupt=True))


def test_chain_report_links_finite():
    report = varq.chain_report(varq.witness_linfty(2, 2), 3.0, 0.1, fejer_degree=15)
    assert report["links"]
    assert all(link["finite"] for link in report["links"])
    json.dumps(report)
