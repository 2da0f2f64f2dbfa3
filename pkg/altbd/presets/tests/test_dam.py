import math

import numpy as np
import pytest

from altbd.errors import ConfigError, Unstable
from altbd.model import Phase, aggregates
from altbd.presets import (
    DamParams,
    dam_certificates,
    dam_closed_form,
    dam_pi0,
    dam_rate_set,
    dam_weights,
    fluid_queue_rate_set,
)
from altbd.stationary import balance_residual, ergodicity, normalize, one_sided_weights

B, D = Phase.B, Phase.D
EXAMPLE = DamParams(1, 3, 1, 1)


def test_rate_set():
    rates = dam_rate_set(EXAMPLE)
    assert [rates.rate(name, 5) for name in ("lambda", "mu", "delta", "beta", "kappa", "nu")] == [
        1.0,
        2.0,
        1.0,
        1.0,
        0.0,
        0.0,
    ]
    agg = aggregates(rates, 5)
    assert (agg.Lambda, agg.M, agg.LambdaPlus, agg.MPlus) == (1, 2, 3, 4)


def test_example_closed_form():
    assert EXAMPLE.ratio == pytest.approx(0.75)
    assert dam_pi0(EXAMPLE) == pytest.approx(0.25)
    dist = dam_closed_form(EXAMPLE, 60)
    assert dist.probability(0, D) == pytest.approx(0.25, rel=1e-12)
    for n in range(0, 61, 7):
        assert dist.probability(n, B) == pytest.approx(0.25 * 0.5 * 0.75**n, rel=1e-12)
    for n in range(1, 61, 7):
        assert dist.probability(n, D) == pytest.approx(0.25 * 0.25 * 0.75 ** (n - 1), rel=1e-12)
    assert dist.total() + dist.tail_error == pytest.approx(1.0, abs=1e-12)
    assert dist.tail_error < 1e-7


def test_unstable():
    p = DamParams(1, 2, 2, 1)
    assert not p.stable
    with pytest.raises(Unstable):
        dam_pi0(p)
    with pytest.raises(Unstable):
        dam_closed_form(p, 10)
    assert dam_certificates(p) == []
    # the builder does not care
    assert dam_rate_set(p).rate("mu", 1) == 1.0


@pytest.mark.parametrize(
    "params",
    [(1, 1, 1, 1), (2, 1, 1, 1), (0, 3, 1, 1), (1, 3, -1, 1), (1, math.inf, 1, 1)],
)
def test_bad_params(params):
    with pytest.raises(ConfigError):
        DamParams(*params)


def random_stable_params(rng):
    while True:
        lam = float(rng.uniform(0.2, 3))
        p = DamParams(lam, lam + float(rng.uniform(0.2, 4)), float(rng.uniform(0.2, 3)), float(rng.uniform(0.2, 3)))
        if p.ratio < 0.9:
            return p


def test_closed_form_matches_normalized_generic_weights():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = random_stable_params(rng)
        closed = dam_closed_form(p, 60)
        generic = normalize(one_sided_weights(dam_rate_set(p), 60), dam_certificates(p))
        np.testing.assert_allclose(closed.prob_b, generic.prob_b, rtol=1e-10)
        np.testing.assert_allclose(closed.prob_d, generic.prob_d, rtol=1e-10)
        assert closed.log_C == pytest.approx(generic.log_C, rel=1e-10)


def test_certificate_ratio_is_exact():
    p = DamParams(0.7, 2.5, 1.3, 0.4)
    (cert,) = dam_certificates(p)
    assert cert.n0 == 1
    log_m = one_sided_weights(dam_rate_set(p), 40).log_level_mass()
    np.testing.assert_allclose(np.diff(log_m)[1:], math.log(cert.rho_bar), rtol=0, atol=1e-12)


def test_weights_match_and_balance():
    p = DamParams(0.7, 2.5, 1.3, 0.4)
    rates = dam_rate_set(p)
    w = dam_weights(p, 30)
    generic = one_sided_weights(rates, 30)
    np.testing.assert_allclose(w.log_b, generic.log_b, rtol=0, atol=1e-12)
    np.testing.assert_allclose(w.log_d, generic.log_d, rtol=0, atol=1e-12)
    assert balance_residual(w, rates) < 1e-10


def test_ergodicity_emits_matching_certificate():
    verdict = ergodicity(dam_rate_set(EXAMPLE))
    assert verdict.verdict == "Ergodic"
    assert verdict.evidence["positive"].branch == "ratio"


def test_fluid_is_symmetric_dam():
    assert fluid_queue_rate_set(1.0, 2.0, 0.5) == dam_rate_set(DamParams(0.5, 1.0, 1.0, 2.0))


def test_fluid_ergodicity():
    assert ergodicity(fluid_queue_rate_set(1.0, 2.0, 1.0)).verdict == "Ergodic"
    assert ergodicity(fluid_queue_rate_set(1.5, 1.5, 1.0)).verdict == "NotErgodic"


def test_fluid_needs_positive_parameters():
    with pytest.raises(ConfigError):
        fluid_queue_rate_set(1.0, 0.0, 1.0)
