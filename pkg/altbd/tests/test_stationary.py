import math

import numpy as np
import pytest

from altbd.errors import (
    CertificateViolated,
    DegenerateDenominator,
    MissingCertificate,
    SingularSystem,
)
from altbd.expr import Affine, Constant, Table, parse_rate_expr
from altbd.model import ChainState, Phase, RateSet, Topology, constant_rate_set, transitions
from altbd.stationary import (
    TailCertificate,
    WeightTable,
    balance_residual,
    criterion_summands,
    cut_defect,
    dense_balance_solve,
    ergodicity,
    finite_weights,
    normalize,
    one_sided_weights,
    two_sided_weights,
    weights,
)

B, D = Phase.B, Phase.D
TWO = Topology.two_sided()


def dam_rates():
    return RateSet(1, 2, 1, 1, 0, 0, allow_zeros=True)


def telegraph_rates(delta=1.0):
    return RateSet(1, 1, delta, 1, 0, 0, topology=TWO, allow_zeros=True)


def falin_rates():
    return RateSet(1, 0, 3, 1, 0, 1, allow_zeros=True)


def log_uniform(rng):
    return float(np.exp(rng.uniform(np.log(0.1), np.log(10))))


def random_rate_set(rng, topology):
    def spec():
        kind = rng.integers(3)
        if kind == 0:
            return Constant(log_uniform(rng))
        if kind == 1 and topology.lower is not None:
            return Affine(log_uniform(rng), float(rng.uniform(0, 0.2)))
        return Table({k: log_uniform(rng) for k in range(-2, 3)}, Constant(log_uniform(rng)))

    return RateSet(spec(), spec(), spec(), spec(), spec(), spec(), topology=topology)


def closed_form_probabilities(w: WeightTable, lo: int, hi: int) -> np.ndarray:
    sub = w.restricted(lo, hi)
    logs = np.column_stack([sub.log_b, sub.log_d]).ravel()
    p = np.exp(logs - logs.max())
    return p / p.sum()


def dense_probabilities(pi, lo, hi) -> np.ndarray:
    sub = pi.restricted(lo, hi)
    return np.column_stack([sub.prob_b, sub.prob_d]).ravel()


#### Closed forms ####


def test_one_sided_weights_of_ones():
    w = one_sided_weights(constant_rate_set(1.0), 30)
    assert w.reference == ChainState(0, D)
    assert w.weight(0, D) == 1.0
    np.testing.assert_allclose(np.exp(w.log_b), 0.5, rtol=1e-12)
    np.testing.assert_allclose(np.exp(w.log_d[1:]), 0.5, rtol=1e-12)


def test_one_sided_weights_of_dam():
    w = one_sided_weights(dam_rates(), 50)
    n = np.arange(51)
    np.testing.assert_allclose(np.exp(w.log_b), 0.5 * 0.75**n, rtol=1e-12)
    np.testing.assert_allclose(np.exp(w.log_d[1:]), 0.25 * 0.75 ** (n[1:] - 1), rtol=1e-12)


def test_one_sided_weights_of_falin():
    w = one_sided_weights(falin_rates(), 40)
    n = np.arange(41)
    np.testing.assert_allclose(np.exp(w.log_b), (2 / 3) ** n / 3, rtol=1e-12)
    np.testing.assert_allclose(np.exp(w.log_d[1:]), 0.5 * (2 / 3) ** n[1:], rtol=1e-12)


def test_one_sided_weights_survive_huge_level_ranges():
    w = one_sided_weights(RateSet(5, 1, 1, 1, 1, 1), 2000)
    assert np.all(np.isfinite(w.log_b))
    assert w.log_b[-1] > 1000


def test_zero_denominator_is_reported():
    rates = RateSet(1, 0, 0, 1, 0, 1, allow_zeros=True)
    with pytest.raises(DegenerateDenominator, match="n=0"):
        one_sided_weights(rates, 3)


def test_weights_reject_wrong_topology():
    with pytest.raises(ValueError):
        one_sided_weights(constant_rate_set(1.0, TWO), 3)
    with pytest.raises(ValueError):
        two_sided_weights(constant_rate_set(1.0), -1, 3)
    with pytest.raises(ValueError):
        finite_weights(constant_rate_set(1.0))


def test_balanced_telegraph_weights_are_flat():
    w = two_sided_weights(telegraph_rates(), -25, 25)
    assert w.reference == ChainState(0, B)
    np.testing.assert_allclose(w.log_b, 0.0, atol=1e-12)
    np.testing.assert_allclose(w.log_d, 0.0, atol=1e-12)


def test_telegraph_weights_halve_on_the_positive_side():
    w = two_sided_weights(telegraph_rates(delta=3.0), -10, 20)
    ratios = np.exp(np.diff(w.log_b[w.levels >= 1]))
    np.testing.assert_allclose(ratios, 0.5, rtol=1e-12)


@pytest.mark.parametrize("n_min, n_max", [(0, 0), (-1, 0), (0, 1), (-7, 3)])
def test_two_sided_ranges(n_min, n_max):
    w = two_sided_weights(telegraph_rates(delta=3.0), n_min, n_max)
    assert w.levels.tolist() == list(range(n_min, n_max + 1))
    assert w.log_weight(0, B) == 0.0


def test_finite_weights_n2():
    w = finite_weights(constant_rate_set(1.0, Topology.finite(2)))
    got = {(n, p): pytest.approx(math.exp(x)) for n, p, x in w.rows()}
    assert got == {
        (0, B): 0.5,
        (0, D): 1.0,
        (1, B): 0.5,
        (1, D): 0.5,
        (2, B): 1.0,
        (2, D): 0.5,
    }


def test_finite_weights_n1():
    w = finite_weights(constant_rate_set(1.0, Topology.finite(1)))
    assert w.weight(1, B) == pytest.approx(1.0)
    assert w.weight(1, D) == pytest.approx(0.5)


@pytest.mark.parametrize("N", [1, 2, 5, 20, 50])
def test_finite_weights_match_dense_solve(N):
    rng = np.random.default_rng(N)
    for _ in range(20):
        rates = random_rate_set(rng, Topology.finite(N))
        w = finite_weights(rates)
        assert np.all(np.isfinite(w.log_b)) and np.all(np.isfinite(w.log_d))
        pi = dense_balance_solve(rates)
        np.testing.assert_allclose(
            closed_form_probabilities(w, 0, N), dense_probabilities(pi, 0, N), rtol=1e-10
        )


def test_finite_interior_matches_one_sided():
    ones = constant_rate_set(1.0)
    finite = constant_rate_set(1.0, Topology.finite(6))
    np.testing.assert_allclose(
        finite_weights(finite).log_b[:6], one_sided_weights(ones, 5).log_b, atol=1e-14
    )


def test_weights_dispatch():
    assert weights(constant_rate_set(1.0, Topology.finite(3))).n_max == 3
    assert weights(constant_rate_set(1.0), 0, 4).n_max == 4
    assert weights(telegraph_rates(), -2, 4).n_min == -2
    with pytest.raises(ValueError):
        weights(constant_rate_set(1.0))


#### Identities ####


def test_cut_identity_on_random_rate_sets():
    rng = np.random.default_rng(11)
    for _ in range(20):
        for topo, lo, hi in ((Topology.one_sided(), 0, 30), (TWO, -30, 30)):
            rates = random_rate_set(rng, topo)
            assert cut_defect(weights(rates, lo, hi), rates) < 1e-12
        rates = random_rate_set(rng, Topology.finite(30))
        assert cut_defect(finite_weights(rates), rates) < 1e-12


def test_balance_residual_of_closed_forms():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rates = random_rate_set(rng, Topology.one_sided())
        assert balance_residual(one_sided_weights(rates, 25), rates) < 1e-10
    tele = telegraph_rates(delta=3.0)
    assert balance_residual(two_sided_weights(tele, -15, 15), tele) < 1e-10


def test_balance_residual_notices_a_perturbation():
    rates = dam_rates()
    w = one_sided_weights(rates, 20)
    log_b = w.log_b.copy()
    log_b[5] += math.log(1.1)
    bent = WeightTable(w.n_min, w.n_max, log_b, w.log_d, w.reference, w.topology)
    assert balance_residual(bent, rates) > 1e-3


def test_oracle_equivalence_one_sided():
    rng = np.random.default_rng(20240611)
    for _ in range(100):
        rates = random_rate_set(rng, Topology.one_sided())
        w = one_sided_weights(rates, 40)
        pi = dense_balance_solve(rates, (0, 40))
        np.testing.assert_allclose(
            closed_form_probabilities(w, 1, 39), dense_probabilities(pi, 1, 39), rtol=1e-8
        )


def test_oracle_equivalence_two_sided():
    rng = np.random.default_rng(77)
    for _ in range(50):
        rates = random_rate_set(rng, TWO)
        w = two_sided_weights(rates, -20, 20)
        pi = dense_balance_solve(rates, (-20, 20))
        np.testing.assert_allclose(
            closed_form_probabilities(w, -19, 19), dense_probabilities(pi, -19, 19), rtol=1e-8
        )


def test_scaling_invariance():
    rates = random_rate_set(np.random.default_rng(3), Topology.finite(12))
    p1 = normalize(finite_weights(rates))
    p2 = normalize(finite_weights(rates.scaled(17.5)))
    np.testing.assert_allclose(p1.prob_b, p2.prob_b, rtol=1e-10)
    np.testing.assert_allclose(p1.prob_d, p2.prob_d, rtol=1e-10)

    cert = [TailCertificate(0, 0.75)]
    d1 = normalize(one_sided_weights(dam_rates(), 40), cert)
    d2 = normalize(one_sided_weights(dam_rates().scaled(0.01), 40), cert)
    np.testing.assert_allclose(d1.prob_b, d2.prob_b, rtol=1e-10)


def test_stationary_distribution_is_not_reversible():
    ones = constant_rate_set(1.0)
    pi = dense_balance_solve(ones, (0, 20))
    z, z_next = ChainState(0, B), ChainState(1, B)
    forward = dict(transitions(ones, z))[z_next]
    backward = dict(transitions(ones, z_next)).get(z, 0.0)
    assert pi.probability(0, B) * forward > 0
    assert backward == 0.0


#### Normalization ####


def test_normalize_dam():
    pi = normalize(one_sided_weights(dam_rates(), 60), [TailCertificate(0, 0.75)])
    assert pi.probability(0, D) == pytest.approx(0.25, abs=1e-7)
    assert pi.tail_error < 1e-7
    assert 1 - pi.tail_error <= pi.total() <= 1 + 1e-12
    assert pi.C == pytest.approx(4.0)


def test_normalize_finite():
    pi = normalize(finite_weights(constant_rate_set(1.0, Topology.finite(2))))
    assert pi.C == pytest.approx(4.0)
    assert pi.probability(2, B) == pytest.approx(0.25)
    assert pi.tail_error == 0.0
    assert pi.probability(3, B) == 0.0


def test_normalize_needs_certificates():
    w = one_sided_weights(dam_rates(), 10)
    with pytest.raises(MissingCertificate):
        normalize(w)
    tele = two_sided_weights(telegraph_rates(), -5, 5)
    with pytest.raises(MissingCertificate, match="negative"):
        normalize(tele, [TailCertificate(0, 0.5)])


def test_constant_weights_violate_any_certificate():
    w = one_sided_weights(constant_rate_set(1.0), 30)
    with pytest.raises(CertificateViolated):
        normalize(w, [TailCertificate(0, 0.999)])


def test_certificate_must_be_reached():
    w = one_sided_weights(dam_rates(), 5)
    with pytest.raises(ValueError, match="n0=10"):
        normalize(w, [TailCertificate(10, 0.75)])


@pytest.mark.parametrize("rho", [0.0, 1.0, 1.5, -0.2])
def test_certificate_rho_range(rho):
    with pytest.raises(ValueError):
        TailCertificate(0, rho)


def test_two_sided_normalization_with_both_certificates():
    # mass halves per level in both directions
    rates = telegraph_rates().with_rates(
        delta=Table({k: 1.0 for k in range(-40, 1)}, Constant(3.0)),
        beta=Table({k: 1.0 for k in range(0, 41)}, Constant(3.0)),
    )
    w = two_sided_weights(rates, -40, 40)
    pi = normalize(
        w, [TailCertificate(1, 0.5, "positive"), TailCertificate(1, 0.5, "negative")]
    )
    assert pi.tail_error < 1e-10
    assert pi.total() == pytest.approx(1.0, abs=1e-10)
    assert balance_residual(w, rates) < 1e-10


def test_restricted_distribution_renormalises():
    pi = normalize(finite_weights(constant_rate_set(1.0, Topology.finite(2))))
    sub = pi.restricted(1, 2)
    assert sub.total() == pytest.approx(1.0)
    assert sub.probability(2, B) == pytest.approx(0.4)


#### Ergodicity ####


def test_ones_are_not_ergodic():
    v = ergodicity(constant_rate_set(1.0))
    assert v.verdict == "NotErgodic"
    assert v.evidence["positive"].branch == "non-vanishing"
    assert not v.certificates


def test_dam_is_ergodic_with_certificate():
    v = ergodicity(dam_rates())
    assert v.verdict == "Ergodic"
    assert v.evidence["positive"].rho == pytest.approx(0.75)
    (cert,) = v.certificates
    assert cert.rho_bar == pytest.approx(0.75)
    pi = normalize(one_sided_weights(dam_rates(), 100), v.certificates)
    assert pi.probability(0, D) == pytest.approx(0.25, abs=1e-10)


def test_finite_is_always_ergodic():
    v = ergodicity(constant_rate_set(1.0, Topology.finite(4)))
    assert v.verdict == "Ergodic"
    assert v.evidence == {}


def test_two_sided_needs_both_sides():
    # halving to the right, doubling to the left
    v = ergodicity(telegraph_rates(delta=3.0), window=(16, 200))
    assert v.evidence["positive"].verdict == "Convergent"
    assert v.evidence["negative"].verdict == "Divergent"
    assert v.verdict == "NotErgodic"


def test_explosive_weights_truncate_the_window():
    rates = RateSet(parse_rate_expr("2^n"), 1, 1, 1, 1, 1)
    with pytest.warns(UserWarning, match="not finite"):
        v = ergodicity(rates, window=(16, 4096))
    assert v.evidence["positive"].truncated_at is not None


def test_criterion_summands_of_ones():
    np.testing.assert_allclose(criterion_summands(constant_rate_set(1.0), n_max=10), 0.0, atol=1e-12)
    neg = criterion_summands(telegraph_rates(delta=3.0), "negative", n_max=10)
    assert neg.size == 10
    np.testing.assert_allclose(np.diff(neg), math.log(2), rtol=1e-12)


def test_ergodicity_rejects_bad_window():
    with pytest.raises(ValueError):
        ergodicity(dam_rates(), window=(1, 100))


#### Dense oracle ####


def test_two_level_dense_solve():
    pi = dense_balance_solve(constant_rate_set(1.0), (0, 1))
    expected = np.array([0.5, 1.0, 1.0, 0.5]) / 3.0
    np.testing.assert_allclose(dense_probabilities(pi, 0, 1), expected, rtol=1e-12)


def test_dense_solve_on_finite_ones():
    pi = dense_balance_solve(constant_rate_set(1.0, Topology.finite(2)))
    expected = normalize(finite_weights(constant_rate_set(1.0, Topology.finite(2))))
    np.testing.assert_allclose(pi.prob_b, expected.prob_b, atol=1e-12)
    np.testing.assert_allclose(pi.prob_d, expected.prob_d, atol=1e-12)


def test_gth_and_lu_agree():
    rates = constant_rate_set(1.0, Topology.finite(2))
    gth = dense_balance_solve(rates, method="gth")
    lu = dense_balance_solve(rates, method="lu")
    np.testing.assert_allclose(gth.prob_b, lu.prob_b, atol=1e-12)
    np.testing.assert_allclose(gth.prob_d, lu.prob_d, atol=1e-12)


def test_dense_dam_truncation():
    pi = dense_balance_solve(dam_rates(), (0, 60))
    assert pi.probability(0, D) == pytest.approx(0.25, abs=1e-7)


def test_reducible_truncation_is_singular():
    # nothing ever leaves phase B
    rates = RateSet(1, 1, 0, 1, 0, 0, allow_zeros=True)
    with pytest.raises(SingularSystem):
        dense_balance_solve(rates, (0, 5))


def test_dense_solve_arguments():
    with pytest.raises(ValueError):
        dense_balance_solve(constant_rate_set(1.0))
    with pytest.raises(ValueError):
        dense_balance_solve(constant_rate_set(1.0), (3, 3))
    with pytest.raises(ValueError):
        dense_balance_solve(constant_rate_set(1.0), (-1, 3))
    with pytest.raises(ValueError):
        dense_balance_solve(constant_rate_set(1.0, Topology.finite(2)), method="qr")
