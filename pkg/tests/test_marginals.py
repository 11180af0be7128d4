"""
Tests de marginales, núcleos de Markov y suavizado de PVMs.
"""

import numpy as np
import pytest

from repository.covariant import CoherentGrid, build_coherent_povm, build_fiducial, build_wh_povm
from repository.marginals import (
    MarkovKernel,
    extract_kernel,
    fourier_basis,
    marginal_kernel_identity_check,
    marginal_p,
    marginal_q,
    position_basis,
    smear_in_basis,
    smear_pvm,
    wh_marginal_kernel,
)
from repository.operators import spectral_norm
from repository.povm import is_commutative, sharp_position_pvm, uniform_povm, validate_povm
from utils.exceptions import ArtifactError, KernelError, NonProductSpaceError

KERNEL_ROWS = [[0.8, 0.2], [0.3, 0.7]]
TILTED_AMPLITUDES = [np.cos(np.pi / 8), np.sin(np.pi / 8)]


class TestMarkovKernel:
    """Tests para la validación y persistencia de núcleos."""

    def test_valid_kernel(self):
        kernel = MarkovKernel(KERNEL_ROWS, name="toy")
        assert (kernel.rows, kernel.cols) == (2, 2)
        assert kernel.row_sum_deviation <= 1e-15
        assert list(kernel.to_dataframe().columns) == ["0", "1"]

    def test_rejects_bad_row(self):
        with pytest.raises(KernelError) as exc:
            MarkovKernel([[0.5, 0.5], [0.6, 0.6]])
        assert exc.value.row == 1
        assert exc.value.details["row"] == 1

    def test_rejects_out_of_range_and_non_finite(self):
        with pytest.raises(KernelError):
            MarkovKernel([[1.5, -0.5]])
        with pytest.raises(KernelError):
            MarkovKernel([[np.nan, 1.0]])
        with pytest.raises(KernelError):
            MarkovKernel(np.zeros((0, 2)))

    def test_event_weights(self):
        kernel = MarkovKernel(KERNEL_ROWS)
        event = sharp_position_pvm(2).space.singleton(1)
        assert np.allclose(kernel.event_weights(event), [0.2, 0.7])
        assert kernel.omega(event, 0) == pytest.approx(0.2)
        with pytest.raises(KernelError):
            kernel.omega(event, 2)

    def test_csv_round_trip(self, tmp_path, rng):
        raw = rng.random((3, 4))
        kernel = MarkovKernel(raw / raw.sum(axis=1, keepdims=True), name="random")
        target = kernel.save_csv(tmp_path / "kernel.csv")
        text = target.read_text(encoding="utf-8")
        assert text.splitlines()[0] == "0,1,2,3"
        assert "\r" not in text
        loaded = MarkovKernel.load_csv(target)
        assert loaded.name == "kernel"
        assert np.array_equal(loaded.matrix, kernel.matrix)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ArtifactError):
            MarkovKernel.load_csv(tmp_path / "missing.csv")


class TestSmearing:
    """Tests para el suavizado de PVMs con núcleos."""

    def test_smeared_effects(self):
        smeared = smear_in_basis("position", MarkovKernel(KERNEL_ROWS))
        povm = smeared.povm
        assert np.allclose(povm.atom_effect(0).matrix, np.diag([0.8, 0.3]))
        assert np.allclose(povm.atom_effect(1).matrix, np.diag([0.2, 0.7]))
        assert spectral_norm(povm.atom_effect(0)) == pytest.approx(0.8)
        assert validate_povm(povm).passed
        assert is_commutative(povm).holds

    def test_fourier_smearing_is_commutative(self, rng):
        raw = rng.random((4, 3))
        kernel = MarkovKernel(raw / raw.sum(axis=1, keepdims=True))
        smeared = smear_in_basis("fourier", kernel)
        assert smeared.povm.space.size == 3
        assert is_commutative(smeared.povm).holds
        assert validate_povm(smeared.povm).passed

    def test_smearing_requires_projective_basis(self):
        with pytest.raises(KernelError):
            smear_pvm(uniform_povm(2, 2), MarkovKernel(KERNEL_ROWS))

    def test_smearing_rejects_row_mismatch(self):
        with pytest.raises(KernelError):
            smear_pvm(sharp_position_pvm(3), MarkovKernel(KERNEL_ROWS))
        with pytest.raises(KernelError):
            smear_in_basis("momentum", MarkovKernel(KERNEL_ROWS))

    def test_extract_recovers_kernel(self):
        smeared = smear_in_basis("position", MarkovKernel(KERNEL_ROWS))
        extraction = extract_kernel(smeared.povm, position_basis(2), name="recovered")
        assert extraction.passed
        assert np.allclose(extraction.kernel.matrix, KERNEL_ROWS)
        assert extraction.to_dict()["failure"] is None

    def test_extract_reports_non_diagonal(self, tilted_fiducial):
        povm = build_wh_povm(2, tilted_fiducial)
        extraction = extract_kernel(marginal_p(povm), position_basis(2))
        assert not extraction.passed
        assert not extraction.diagonalizable
        assert extraction.failure == "not-diagonalizable-in-basis"
        assert extraction.worst_off_diagonal > 0.1


class TestMarginals:
    """Tests de las marginales de POVMs de espacio de fase."""

    def test_position_marginal_of_tilted_wh(self, tilted_fiducial):
        povm = build_wh_povm(2, tilted_fiducial)
        marginal = marginal_q(povm)
        c2, s2 = TILTED_AMPLITUDES[0] ** 2, TILTED_AMPLITUDES[1] ** 2
        assert marginal.space.kind == "points"
        assert np.allclose(marginal.atom_effect(0).matrix, np.diag([c2, s2]))
        assert np.allclose(marginal.atom_effect(1).matrix, np.diag([s2, c2]))
        assert float(marginal.atom_norms().max()) == pytest.approx(c2)
        assert is_commutative(marginal, 1e-12).holds
        assert validate_povm(marginal).passed

    def test_marginal_threshold_follows_parent(self, wh_basis_d4):
        marginal = marginal_p(wh_basis_d4)
        assert marginal.threshold == pytest.approx(wh_basis_d4.threshold + 1e-12)
        assert marginal.metadata["axis"] == "p"
        assert np.allclose(marginal.dense_stack, np.stack([np.eye(4) / 4.0] * 4))

    def test_marginal_requires_product_space(self):
        with pytest.raises(NonProductSpaceError):
            marginal_q(sharp_position_pvm(3))

    def test_coherent_marginal_lives_on_line(self):
        povm = build_coherent_povm(CoherentGrid(4, 6.0, 0.5), truncation="project")
        marginal = marginal_q(povm)
        assert marginal.space.kind == "line"
        assert marginal.space.size == 24
        assert marginal.space.step == pytest.approx(0.5)

    def test_position_kernel_formula(self, rng):
        fiducial = build_fiducial({"label": "random"}, 5, rng=rng)
        kernel = wh_marginal_kernel(fiducial, "q")
        profile = np.abs(fiducial.amplitudes) ** 2
        assert kernel.name == "position"
        for x in range(5):
            for q in range(5):
                assert kernel.matrix[x, q] == pytest.approx(profile[(x - q) % 5])

    def test_momentum_kernel_uses_fourier_profile(self, rng):
        fiducial = build_fiducial({"label": "random"}, 4, rng=rng)
        kernel = wh_marginal_kernel(fiducial, "p")
        profile = np.abs(fourier_basis(4).conj().T @ fiducial.amplitudes) ** 2
        assert kernel.name == "momentum"
        assert np.allclose(kernel.matrix[:, 0], profile)

    @pytest.mark.parametrize("axis", ["q", "p"])
    def test_kernel_identity(self, rng, axis):
        fiducial = build_fiducial({"label": "random"}, 5, rng=rng)
        check = marginal_kernel_identity_check(5, fiducial, axis)
        assert check.passed
        assert check.max_deviation <= 1e-10
        assert check.kernel is not None
        assert check.to_dict()["axis"] == axis

    @pytest.mark.parametrize("axis", ["q", "p"])
    @pytest.mark.parametrize("d", [2, 4, 8])
    def test_kernel_identity_over_random_fiducials(self, d, axis):
        for k in range(10):
            fiducial = build_fiducial({"label": "random"}, d, rng=np.random.default_rng([d, k]))
            check = marginal_kernel_identity_check(d, fiducial, axis)
            assert check.passed, (d, k, axis)
            assert check.max_deviation <= 1e-10
