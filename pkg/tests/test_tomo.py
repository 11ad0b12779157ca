"""Pipeline tests: sampling conventions, post-selection, reconstruction,
bootstrap calibration, and the experiment table."""

import math

import numpy as np
import pytest

from mss.magic import c_closed_form
from mss.qcore import fidelity, phase_plus
from mss.tomo import (
    DISTILLATION_THRESHOLD,
    CorrectedCounts,
    CountsTable,
    NoiseModel,
    bootstrap,
    circuit_probabilities,
    exact_corrected_counts,
    experiment_table,
    post_select_and_correct,
    reconstruct,
    sample_run,
    stream_rng,
)

ZERO_NOISE = NoiseModel.none()


def pipeline_c(phi, shots, noise, seed, party="charlie"):
    corrected = {
        b: post_select_and_correct(sample_run(phi, b, shots, noise, seed, party=party))
        for b in ("X", "Y", "Z")
    }
    return reconstruct(corrected["X"], corrected["Y"], corrected["Z"],
                       phi=phi if party == "charlie" else None)


class TestNoiseModel:
    def test_symmetric_constructor(self):
        m = NoiseModel.symmetric(0.01, 0.02, 0.03)
        assert m.p1 == 0.01 and m.p2 == 0.02
        np.testing.assert_allclose(m.readout[1], [[0.97, 0.03], [0.03, 0.97]])

    def test_probability_bounds(self):
        with pytest.raises(ValueError, match=r"\[0, 0.5\]"):
            NoiseModel.symmetric(0.6, 0.0, 0.0)

    def test_column_sums_enforced(self):
        bad = np.stack([np.array([[0.9, 0.0], [0.0, 1.0]])] * 3)
        with pytest.raises(ValueError, match="sum to 1"):
            NoiseModel(p1=0.0, p2=0.0, readout=bad)


class TestSampling:
    def test_fixed_seed_reproduces_counts(self):
        a = sample_run(np.pi / 4, "X", 2048, ZERO_NOISE, seed=7)
        b = sample_run(np.pi / 4, "X", 2048, ZERO_NOISE, seed=7)
        assert a.counts == b.counts

    def test_distinct_bases_use_distinct_streams(self):
        a = sample_run(np.pi / 4, "X", 2048, ZERO_NOISE, seed=7)
        b = sample_run(np.pi / 4, "Y", 2048, ZERO_NOISE, seed=7)
        assert a.counts != b.counts

    def test_zero_noise_z_basis_is_balanced(self):
        table = sample_run(np.pi / 4, "Z", 2 ** 15, ZERO_NOISE, seed=3)
        cc = post_select_and_correct(table)
        assert abs(cc.expectation) < 4 / math.sqrt(cc.n_eff)

    def test_zero_noise_x_basis_matches_cosine(self):
        table = sample_run(np.pi / 4, "X", 2 ** 15, ZERO_NOISE, seed=5)
        cc = post_select_and_correct(table)
        assert cc.expectation == pytest.approx(math.cos(np.pi / 4), abs=4 / math.sqrt(cc.n_eff))

    def test_counts_table_invariant(self):
        with pytest.raises(ValueError, match="sum to shots"):
            CountsTable(basis_label="X", counts={"000": 5}, shots=6)


class TestCircuitProbabilities:
    def test_ideal_distribution_normalised(self):
        p = circuit_probabilities(0.9, "Y", ZERO_NOISE)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert p.min() >= 0

    def test_alice_marginal_is_half(self):
        # Dealer's X outcome is 50/50 for every angle and basis; q0 is the
        # most significant bit of the big-endian index, so the first half.
        for basis in ("X", "Y", "Z"):
            p = circuit_probabilities(1.3, basis, ZERO_NOISE)
            assert p[:4].sum() == pytest.approx(0.5, abs=1e-12)

    def test_depolarizing_shrinks_contrast(self):
        clean = circuit_probabilities(np.pi / 4, "X", ZERO_NOISE)
        noisy = circuit_probabilities(np.pi / 4, "X", NoiseModel.symmetric(0.05, 0.05, 0.0))
        assert np.max(np.abs(noisy - 1 / 8)) < np.max(np.abs(clean - 1 / 8))


class TestPostSelection:
    def test_all_zeros_kept(self):
        table = CountsTable(basis_label="Z", counts={"000": 64}, shots=64)
        cc = post_select_and_correct(table)
        assert (cc.n0, cc.n1, cc.n_eff) == (64.0, 0.0, 64.0)

    def test_alice_bit_is_last_character(self):
        # "001" in LSb-0 reads q2=0, q1=0, q0=1: Alice measured 1, dropped.
        table = CountsTable(basis_label="Z", counts={"001": 10, "100": 5}, shots=15)
        cc = post_select_and_correct(table)
        assert cc.n_eff == 5.0
        assert cc.n1 == 5.0  # Charlie's bit is the first character

    def test_bob_flip_applies_in_x_and_y_only(self):
        counts = {"010": 8}  # q2=0, q1=1 (m_B = minus), q0=0
        for basis, expect_bit1 in (("X", True), ("Y", True), ("Z", False)):
            cc = post_select_and_correct(
                CountsTable(basis_label=basis, counts=dict(counts), shots=8))
            assert (cc.n1 == 8.0) is expect_bit1

    def test_bob_party_not_corrected(self):
        counts = {"010": 8}
        cc = post_select_and_correct(
            CountsTable(basis_label="X", counts=dict(counts), shots=8, party="bob"))
        assert cc.n1 == 8.0  # Bob's own bit, no flip

    def test_malformed_bitstring(self):
        table = CountsTable(basis_label="Z", counts={"000": 1}, shots=1)
        object.__setattr__(table, "counts", {"0a0": 1})
        with pytest.raises(ValueError, match="malformed"):
            post_select_and_correct(table)

    def test_correction_recovers_statistics(self):
        # With the flip rule, the two m_B branches pool into one estimate of
        # cos(phi); without it they would cancel.
        phi = np.pi / 3
        table = sample_run(phi, "X", 2 ** 15, ZERO_NOISE, seed=11)
        cc = post_select_and_correct(table)
        assert cc.expectation == pytest.approx(math.cos(phi), abs=4 / math.sqrt(cc.n_eff))


class TestReconstruct:
    def test_exact_expectations_reproduce_state(self):
        phi = np.pi / 8
        res = reconstruct(
            exact_corrected_counts(phi, "X", 2048),
            exact_corrected_counts(phi, "Y", 2048),
            exact_corrected_counts(phi, "Z", 2048),
            phi=phi,
        )
        assert res.c_value == pytest.approx(0.15328148243818825, abs=1e-9)
        assert res.fidelity == pytest.approx(1.0, abs=1e-12)
        assert res.n_eff == 2048

    def test_maximally_mixed_counts(self):
        flat = CorrectedCounts(basis_label="X", n0=512, n1=512)
        res = reconstruct(
            flat,
            CorrectedCounts(basis_label="Y", n0=512, n1=512),
            CorrectedCounts(basis_label="Z", n0=512, n1=512),
        )
        assert res.c_value == 0.0
        np.testing.assert_allclose(res.bloch_raw, [0, 0, 0], atol=1e-15)
        assert math.isnan(res.fidelity)

    def test_three_sigma_perturbations_stay_free(self, rng):
        n = 2048
        for _ in range(25):
            b = rng.uniform(-0.066, 0.066, size=3)
            res = reconstruct(
                CorrectedCounts("X", n0=(1 + b[0]) / 2 * n, n1=(1 - b[0]) / 2 * n),
                CorrectedCounts("Y", n0=(1 + b[1]) / 2 * n, n1=(1 - b[1]) / 2 * n),
                CorrectedCounts("Z", n0=(1 + b[2]) / 2 * n, n1=(1 - b[2]) / 2 * n),
            )
            assert res.c_value == 0.0

    def test_physicality_projection(self):
        res = reconstruct(
            CorrectedCounts("X", n0=100, n1=0),
            CorrectedCounts("Y", n0=100, n1=0),
            CorrectedCounts("Z", n0=100, n1=0),
        )
        assert np.linalg.norm(res.bloch_raw) > 1  # raw kept as measured
        assert min(np.linalg.eigvalsh(res.rho.mat)) >= -1e-10

    def test_empty_sample_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            reconstruct(
                CorrectedCounts("X", n0=0, n1=0),
                CorrectedCounts("Y", n0=1, n1=0),
                CorrectedCounts("Z", n0=1, n1=0),
            )

    def test_zero_noise_consistency_large_shots(self):
        shots = 2 ** 17
        for phi in (np.pi / 8, np.pi / 4, 2.0):
            res = pipeline_c(phi, shots, ZERO_NOISE, seed=23)
            assert res.c_value == pytest.approx(
                c_closed_form(phi), abs=3 / math.sqrt(res.n_eff))


class TestBootstrap:
    def test_shot_noise_scale(self):
        phi = np.pi / 4
        counts = [exact_corrected_counts(phi, b, 2048) for b in ("X", "Y", "Z")]
        sigma_c, sigma_f = bootstrap(*counts, n_boot=800, seed=1, phi=phi)
        # per-Pauli shot noise is 1/sqrt(2048) ~ 0.022; C inherits a
        # comparable scale through the octahedron facet gradient
        assert 0.005 < sigma_c < 0.03
        assert 0.0 < sigma_f < 0.03

    def test_sigma_decreases_with_sample_size(self):
        phi = np.pi / 4
        sigmas = []
        for n_eff in (512, 2048, 8192):
            counts = [exact_corrected_counts(phi, b, n_eff) for b in ("X", "Y", "Z")]
            sigma_c, _ = bootstrap(*counts, n_boot=600, seed=2, phi=phi)
            sigmas.append(sigma_c)
        assert sigmas[0] > sigmas[1] > sigmas[2]

    def test_deterministic(self):
        phi = 0.6
        counts = [exact_corrected_counts(phi, b, 1024) for b in ("X", "Y", "Z")]
        assert bootstrap(*counts, n_boot=200, seed=9, phi=phi) == \
            bootstrap(*counts, n_boot=200, seed=9, phi=phi)

    def test_minimum_replicas(self):
        counts = [exact_corrected_counts(0.6, b, 1024) for b in ("X", "Y", "Z")]
        with pytest.raises(ValueError, match="at least 100"):
            bootstrap(*counts, n_boot=50, seed=9, phi=0.6)

    def test_matches_run_to_run_scatter(self):
        # sigma_C from one bootstrap should sit within a factor of two of the
        # spread of C across independent seeded pipelines.
        phi = np.pi / 4
        shots = 4096
        c_values = [pipeline_c(phi, shots, ZERO_NOISE, seed=100 + k).c_value
                    for k in range(100)]
        scatter = float(np.std(c_values, ddof=1))
        corrected = {
            b: post_select_and_correct(sample_run(phi, b, shots, ZERO_NOISE, seed=100))
            for b in ("X", "Y", "Z")
        }
        sigma_c, _ = bootstrap(corrected["X"], corrected["Y"], corrected["Z"],
                               n_boot=800, seed=100, phi=phi)
        assert scatter / 2 < sigma_c < scatter * 2


class TestExperimentTable:
    def test_zero_noise_table(self):
        report = experiment_table([np.pi / 8, np.pi / 4], shots=4096,
                                  noise=ZERO_NOISE, seed=42, n_boot=300)
        for row in report.rows:
            assert abs(row.c_charlie - row.c_theory) < 3 * row.sigma_c + 1e-9
            assert row.c_bob == 0.0
            assert row.fidelity > 0.99
            assert row.exceeds_distillation_threshold
            assert row.n_eff > 1500

    def test_byte_identical_outputs(self):
        kwargs = dict(phis=[np.pi / 8], shots=1024, noise=NoiseModel.symmetric(0.003, 0.015, 0.01),
                      seed=7, n_boot=200)
        a = experiment_table(**kwargs)
        b = experiment_table(**kwargs)
        assert a.to_csv() == b.to_csv()
        assert a.to_json_obj() == b.to_json_obj()
        assert a.plot_data_csv() == b.plot_data_csv()

    def test_noisy_fidelity_band(self):
        report = experiment_table([np.pi / 4], shots=4096,
                                  noise=NoiseModel.symmetric(0.003, 0.015, 0.01),
                                  seed=11, n_boot=200)
        row = report.rows[0]
        assert 0.90 <= row.fidelity <= 0.995
        assert row.fidelity > DISTILLATION_THRESHOLD
        assert row.c_bob == 0.0

    def test_plot_data_has_curve_and_points(self):
        report = experiment_table([np.pi / 4], shots=512, noise=ZERO_NOISE,
                                  seed=3, n_boot=150)
        lines = report.plot_data_csv(n_curve=50).strip().split("\n")
        assert lines[0] == "kind,phi,c_theory,c_measured,sigma_c"
        kinds = [l.split(",")[0] for l in lines[1:]]
        assert kinds.count("curve") == 50
        assert kinds.count("point") == 1


class TestNoiseRobustSecurity:
    def test_bob_stays_free_under_strong_noise(self):
        # 200 seeded noisy runs at the worst-case noise level: the
        # reconstructed middle-party state must stay inside the polytope in
        # at least 99% of them.
        noise = NoiseModel.symmetric(0.05, 0.05, 0.03)
        zero = 0
        runs = 200
        for k in range(runs):
            res = pipeline_c(np.pi / 4, 1024, noise, seed=1000 + k, party="bob")
            if res.c_value == 0.0:
                zero += 1
        assert zero >= 0.99 * runs


def test_stream_rng_labels_are_disjoint():
    a = stream_rng(5, "alpha").integers(0, 2 ** 32, size=4)
    b = stream_rng(5, "beta").integers(0, 2 ** 32, size=4)
    c = stream_rng(5, "alpha").integers(0, 2 ** 32, size=4)
    assert not np.array_equal(a, b)
    np.testing.assert_array_equal(a, c)
