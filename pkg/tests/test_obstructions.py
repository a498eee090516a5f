import pytest

from cayleywalk.errors import InvalidParameterError
from cayleywalk.obstructions import (
    STATUS_EVIDENCE,
    STATUS_INCONCLUSIVE,
    descent_audit,
    higman_quotient_search,
    involution_ghf_obstruction,
    multiplicative_order,
    torsion_obstruction,
)
from cayleywalk.oracles import presentation_for


def test_grigorchuk_torsion_evidence(grig):
    report = torsion_obstruction(grig, 5)
    assert report.status == STATUS_EVIDENCE
    assert report.failure is None
    assert report.all_powers_of_two
    assert report.histogram[1] == 1
    assert report.histogram[2] >= 4
    assert report.elements_checked == sum(report.histogram.values())
    assert report.argument


def test_grigorchuk_torsion_is_stable_as_cap_grows(grig):
    short = torsion_obstruction(grig, 4)
    longer = torsion_obstruction(grig, 6)
    for report in (short, longer):
        assert report.status == STATUS_EVIDENCE
        assert report.failure is None
        assert report.all_powers_of_two
    assert longer.elements_checked > short.elements_checked
    assert all(longer.histogram[order] >= count for order, count in short.histogram.items())


def test_tree_torsion_is_inconclusive(tree3):
    report = torsion_obstruction(tree3, 3)
    assert report.status == STATUS_INCONCLUSIVE
    assert report.failure["reason"] == "infinite order certified"
    assert len(report.failure["word"].split()) == 2


def test_order_cap_makes_torsion_inconclusive(grig):
    report = torsion_obstruction(grig, 3, order_cap=8)
    assert report.status == STATUS_INCONCLUSIVE
    assert report.failure["reason"] == "order exceeds cap 8"
    assert report.to_dict()["failure"]["reason"] == "order exceeds cap 8"


def test_torsion_needs_positive_depth(grig):
    with pytest.raises(InvalidParameterError):
        torsion_obstruction(grig, 0)


def test_multiplicative_order():
    assert multiplicative_order(2, 7) == 3
    assert multiplicative_order(2, 31) == 5
    assert multiplicative_order(2, 3) == 2
    with pytest.raises(InvalidParameterError):
        multiplicative_order(2, 6)
    with pytest.raises(InvalidParameterError):
        multiplicative_order(2, 1)


def test_descent_audit():
    steps = descent_audit(50)
    assert [s.prime for s in steps][:4] == [3, 5, 7, 11]
    seven = next(s for s in steps if s.prime == 7)
    assert (seven.order, seven.smaller_prime) == (3, 3)
    assert all(s.descends for s in steps)


def test_higman_search_finds_nothing():
    result = higman_quotient_search(10_000)
    assert result.solutions == []
    assert result.audit_passed
    assert result.chains_examined > 0
    assert result.to_dict()["audit_primes"] == len(result.audit)


def test_higman_search_is_worker_independent():
    single = higman_quotient_search(3000)
    pooled = higman_quotient_search(3000, workers=2)
    assert pooled.solutions == single.solutions == []
    assert pooled.chains_examined == single.chains_examined


def test_higman_search_bound():
    with pytest.raises(InvalidParameterError):
        higman_quotient_search(1)


def test_involution_obstruction():
    cert = involution_ghf_obstruction(presentation_for("tree:3"))
    assert cert.applicable
    assert cert.to_dict()["status"] == "certificate"
    assert involution_ghf_obstruction(presentation_for("grigorchuk")).applicable
    other = involution_ghf_obstruction(presentation_for("grig-hnn"))
    assert not other.applicable
    assert other.generators == ["t"]
