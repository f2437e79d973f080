import numpy as np
import pytest

import stochprod as sp
from stochprod.errors import EnumerationTooLarge, InvalidDistribution, NoCertificate

# three diagonal modes driven by a two-phase modulating chain: mode 0 damps
# the first coordinate, modes 1 and 2 damp the second by 0.8 / 0.6
MODES = (np.array([[0.2, 0.0], [0.0, 1.0]]),
         np.array([[1.0, 0.0], [0.0, 0.8]]),
         np.array([[1.0, 0.0], [0.0, 0.6]]))
PI = np.array([[0.0, 0.4, 0.6], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])


@pytest.fixture
def damped_system():
    signal = sp.MarkovModulatedModel(initial=[1, 0, 0], transition=PI, seed=50)
    return sp.SwitchedSystem(modes=MODES, signal=signal)


def single_mode_system(matrix, seed=0):
    return sp.SwitchedSystem(modes=(np.asarray(matrix, dtype=float),),
                             signal=sp.IIDModel(weights=[1.0], seed=seed))


class TestExpectedLyapunov:
    def test_degenerate_signal_one_step(self):
        system = single_mode_system([[0.5, 0], [0, 0.5]])
        v = sp.inf_norm()
        x = np.array([1.0, -2.0])
        assert sp.expected_lyapunov(system, v, x, 0, 1) == pytest.approx(
            float(v(0.5 * x)))

    def test_two_step_second_axis(self, damped_system):
        # continuations from mode 0: (1,0) w.p. 0.4 and (2,0) w.p. 0.6;
        # on x = e2 the products scale the second coordinate by 0.8 / 0.6
        got = sp.expected_lyapunov(damped_system, sp.inf_norm(), [0, 1], 0, 2)
        assert got == pytest.approx(0.4 * 0.8 + 0.6 * 0.6, abs=1e-12)

    def test_two_step_first_axis(self, damped_system):
        # both continuations damp the first coordinate to 0.2
        got = sp.expected_lyapunov(damped_system, sp.inf_norm(), [1, 0], 0, 2)
        assert got == pytest.approx(0.2, abs=1e-12)

    def test_homogeneity_of_expectation(self, damped_system):
        v = sp.inf_norm()
        x = np.array([0.3, -0.7])
        base = sp.expected_lyapunov(damped_system, v, x, 1, 2)
        for c in (0.5, 2.0, 10.0):
            scaled = sp.expected_lyapunov(damped_system, v, c * x, 1, 2)
            assert scaled == pytest.approx(c * base, rel=1e-12)

    def test_enumeration_guard(self):
        signal = sp.IIDModel(weights=np.full(10, 0.1), seed=1)
        system = sp.SwitchedSystem(modes=tuple(np.eye(2) for _ in range(10)),
                                   signal=signal)
        with pytest.raises(EnumerationTooLarge):
            sp.expected_lyapunov(system, sp.inf_norm(), [1, 0], 0, 7)


class TestCertify:
    def test_single_contracting_mode(self):
        system = single_mode_system(0.5 * np.eye(2))
        cert = sp.certify_contraction(system, sp.inf_norm(), horizon_max=3)
        assert cert.horizon == 1
        assert cert.alpha == pytest.approx(0.5, abs=1e-12)
        assert cert.rate == pytest.approx(0.5, abs=1e-12)

    def test_damped_system_two_step_certificate(self, damped_system):
        cert = sp.certify_contraction(damped_system, sp.inf_norm(), horizon_max=4)
        assert cert.horizon == 2
        assert cert.alpha >= 0.3 - 1e-9
        assert cert.supermartingale_ok
        assert cert.rate == pytest.approx((1 - cert.alpha) ** 0.5)

    def test_identity_mode_never_certifies(self):
        system = single_mode_system(np.eye(2))
        with pytest.raises(NoCertificate):
            sp.certify_contraction(system, sp.inf_norm(), horizon_max=3)

    def test_certificate_soundness_on_grid(self, damped_system):
        v = sp.inf_norm()
        cert = sp.certify_contraction(damped_system, v, horizon_max=4)
        pts = sp.SphereGrid().points(2)
        for mode in range(3):
            for x in pts[::7]:
                e = sp.expected_lyapunov(damped_system, v, x, mode, cert.horizon)
                assert e <= (1 - cert.alpha) * float(v(x)) + 1e-10

    def test_worst_point_value_matches_hand_enumeration(self, damped_system):
        # exact sup of the 2-step conditional expectation on the sphere:
        # 0.4 * max(0.2 a, 0.8 b) + 0.6 * max(0.2 a, 0.6 b) over faces,
        # attained at b = 1 with value 0.68 regardless of the current mode
        cert = sp.certify_contraction(damped_system, sp.inf_norm(), horizon_max=2)
        assert 1 - cert.alpha == pytest.approx(0.68, abs=1e-9)

    def test_scripted_signal_rejected(self):
        system = sp.SwitchedSystem(
            modes=(0.5 * np.eye(2), np.eye(2)),
            signal=sp.ScriptedModel(indices=(0, 1)))
        with pytest.raises(InvalidDistribution):
            sp.certify_contraction(system, sp.inf_norm(), horizon_max=2)

    def test_requires_homogeneous(self):
        system = single_mode_system(0.5 * np.eye(2))
        v = sp.LyapunovFunction(fn=lambda x: np.abs(x).max(axis=-1), degree=None)
        with pytest.raises(InvalidDistribution):
            sp.certify_contraction(system, v, horizon_max=2)

    def test_higher_dimension_grid(self):
        system = single_mode_system(0.25 * np.eye(4))
        cert = sp.certify_contraction(system, sp.inf_norm(), horizon_max=2,
                                      grid=sp.SphereGrid(points_per_face=64))
        assert cert.horizon == 1
        assert cert.alpha == pytest.approx(0.75, abs=1e-12)


class TestMonteCarlo:
    def test_single_mode_exact_rate(self):
        system = single_mode_system(0.5 * np.eye(2), seed=8)
        report = sp.monte_carlo_decay(system, sp.inf_norm(), [1.0, 1.0],
                                      steps=100, trials=3)
        assert report.fitted_rate == pytest.approx(0.5, abs=1e-9)

    def test_zero_initial_state(self):
        system = single_mode_system(0.5 * np.eye(2))
        report = sp.monte_carlo_decay(system, sp.inf_norm(), [0.0, 0.0],
                                      steps=20, trials=2)
        assert report.fitted_rate == 0.0
        assert report.tail_fraction == 1.0

    def test_damped_system_beats_certified_rate(self, damped_system):
        cert = sp.certify_contraction(damped_system, sp.inf_norm(), horizon_max=2)
        report = sp.monte_carlo_decay(damped_system, sp.inf_norm(), [1.0, 1.0],
                                      steps=200, trials=60)
        rates = np.asarray(report.per_trial_rate)
        sigma = rates.std(ddof=1)
        assert report.fitted_rate <= cert.rate + 3 * sigma

    def test_rescaled_paths_stay_bounded(self, damped_system):
        # gamma^k V(x_k) with gamma the certificate's inverse rate is a
        # supermartingale along certificate blocks: its mean never exceeds
        # V(x0), which by Markov's inequality pins the 99th percentile
        cert = sp.certify_contraction(damped_system, sp.inf_norm(), horizon_max=2)
        v = sp.inf_norm()
        x0 = np.array([1.0, 1.0])
        _, history = sp.monte_carlo_decay(damped_system, v, x0, steps=120,
                                          trials=200, keep_history=True)
        gamma = 1.0 / cert.rate
        weights = gamma ** np.arange(history.shape[1])
        rescaled = history * weights[None, :]
        block_samples = rescaled[:, ::cert.horizon]
        means = block_samples.mean(axis=0)
        stderr = block_samples.std(axis=0, ddof=1) / np.sqrt(block_samples.shape[0])
        assert np.all(means <= float(v(x0)) + 3 * stderr + 1e-12)
        q99 = np.quantile(rescaled, 0.99, axis=0)
        assert q99.max() <= 100.0 * float(v(x0))

    def test_reproducible(self, damped_system):
        kw = dict(steps=50, trials=5)
        a = sp.monte_carlo_decay(damped_system, sp.inf_norm(), [1.0, 1.0], **kw)
        b = sp.monte_carlo_decay(damped_system, sp.inf_norm(), [1.0, 1.0], **kw)
        assert a == b

    def test_non_homogeneous_function_still_simulates(self, damped_system):
        # certification needs homogeneity; plain decay fitting does not
        v = sp.LyapunovFunction(fn=lambda x: np.abs(x).max(axis=-1) ** 2
                                + np.abs(x).sum(axis=-1), degree=None)
        report = sp.monte_carlo_decay(damped_system, v, [1.0, 1.0],
                                      steps=80, trials=5)
        assert 0 < report.fitted_rate < 1
