"""
Tests de los análisis: norma 1, condición necesaria, refinamiento,
escala de celdas y localización conjunta.
"""

import numpy as np
import pytest

from repository.analysis import (
    RefinementSequence,
    absolute_continuity_audit,
    axis_event,
    cell_shrink_scaling,
    default_refinement_sequences,
    enumerate_events,
    joint_localization_bound,
    necessary_condition_family,
    necessary_condition_verdict,
    norm1_report,
    point_shrinking_sequence,
    refinement_check,
)
from repository.covariant import CoherentGrid, build_coherent_povm, build_fiducial, build_wh_povm
from repository.povm import DiscretePOVM, OutcomeSpace, sharp_position_pvm
from utils.exceptions import InsufficientLevelsError, InvalidRefinementError, NonProductSpaceError, RejectedInputError


def coherent_family(cell_sizes=(1.0, 0.5, 0.25)):
    """Familia renormalizada N=8, L=2 con rejillas anidadas."""
    return [build_coherent_povm(CoherentGrid(8, 2.0, h), threshold=25.0) for h in cell_sizes]


def lattice_with_hole(weight):
    """POVM sobre ℤ_2 × ℤ_2 con un único átomo no nulo en (0, 0)."""
    vectors = np.array([[1, 0], [0, 1], [0, 1], [0, 1]], dtype=np.complex128)
    return DiscretePOVM.from_rank_one(OutcomeSpace.lattice(2), [weight, 0.0, 0.0, 0.0], vectors)


class TestEventEnumeration:
    """Tests de la enumeración de eventos."""

    def test_exhaustive_enumeration(self):
        events = enumerate_events(OutcomeSpace.points(3))
        assert len(events) == 8
        assert events[0].event.atom_indices == ()
        assert events[5].event.atom_indices == (0, 2)
        assert {e.kind for e in events} == {"exhaustive"}

    def test_random_enumeration_requires_seed(self):
        space = OutcomeSpace.lattice(4)
        with pytest.raises(RejectedInputError) as exc:
            enumerate_events(space)
        assert exc.value.reason == "seed_required"

    def test_random_enumeration(self, rng):
        events = enumerate_events(OutcomeSpace.lattice(4), rng=rng)
        kinds = [e.kind for e in events]
        assert len(events) == 2 + 16 + 200
        assert kinds[:2] == ["empty", "full"]
        assert kinds.count("singleton") == 16
        assert kinds.count("random") == 200

    def test_enumeration_is_reproducible(self):
        first = enumerate_events(OutcomeSpace.lattice(4), rng=np.random.default_rng(7))
        second = enumerate_events(OutcomeSpace.lattice(4), rng=np.random.default_rng(7))
        assert [e.event.atom_indices for e in first] == [e.event.atom_indices for e in second]


class TestNorm1:
    """Tests de la propiedad de norma 1."""

    def test_sharp_pvm_has_norm1(self):
        povm = sharp_position_pvm(4)
        report = norm1_report(povm, enumerate_events(povm.space))
        assert report.has_norm1
        assert len(report.records) == 16
        assert report.records[0].zero
        assert report.records[0].state_ref is None
        assert all(abs(r.gap) <= 1e-12 for r in report.records if not r.zero)
        assert len(report.states) == 15

    def test_wh_basis_fails(self):
        povm = build_wh_povm(2, build_fiducial({"label": "basis", "index": 0}, 2))
        report = norm1_report(povm, enumerate_events(povm.space))
        assert report.verdict == "fails"
        assert report.records[1].norm == pytest.approx(0.5)
        assert 1 in report.witnesses
        assert report.max_gap == pytest.approx(0.5)
        assert report.to_dict()["events"] == 16

    def test_maximizing_state_attains_norm(self, tilted_fiducial):
        povm = build_wh_povm(2, tilted_fiducial)
        report = norm1_report(povm, [povm.space.event([0, 1])])
        record = report.records[0]
        assert record.expectation == pytest.approx(record.norm, abs=1e-12)
        assert record.state_ref == "s0"

    def test_flags_norm_above_identity(self):
        # Dos átomos 0.6·|0⟩⟨0|: F(Ω) = diag(1.2, 0), defecto admitido 1.0
        vectors = np.array([[1.0, 0.0], [1.0, 0.0]])
        povm = DiscretePOVM.from_rank_one(OutcomeSpace.points(2), [0.6, 0.6], vectors)
        report = norm1_report(povm, [povm.space.full_event(), povm.space.singleton(0)])
        assert report.records[0].norm == pytest.approx(1.2)
        assert report.records[0].exceeds_identity
        assert not report.records[1].exceeds_identity
        assert report.above_identity == [0]
        assert report.to_dict()["above_identity"] == [0]

    def test_excluded_verdict_uses_necessary_condition(self):
        povm = lattice_with_hole(0.5)
        necessary = necessary_condition_verdict(povm)
        assert necessary.verdict == "norm-1-excluded"
        assert necessary.witnesses == [1, 2]
        report = norm1_report(povm, enumerate_events(povm.space), necessary=necessary)
        assert report.verdict == "excluded-by-necessary-condition"

    def test_necessary_condition_inconclusive(self, wh_basis_d4):
        verdict = necessary_condition_verdict(wh_basis_d4)
        assert verdict.verdict == "inconclusive"
        assert verdict.atom_norm_ceiling == pytest.approx(0.25)
        assert verdict.max_cell_measure == pytest.approx(0.25)

    def test_necessary_condition_trend(self):
        trend = necessary_condition_family(coherent_family())
        assert trend.slope == pytest.approx(1.0, abs=1e-9)
        assert trend.verdict == "norm-1-excluded"
        with pytest.raises(InsufficientLevelsError):
            necessary_condition_family(coherent_family((0.5,)))


class TestRefinement:
    """Tests de sucesiones de refinamiento y continuidad."""

    def test_default_sequences_on_pvm(self):
        povm = sharp_position_pvm(4)
        sequences = default_refinement_sequences(povm.space)
        assert [s.direction for s in sequences] == ["increasing", "decreasing-to-empty", "decreasing-to-atom"]
        reports = [refinement_check(povm, s) for s in sequences]
        assert all(r.dominated for r in reports)
        assert reports[0].identity_deviation <= 1e-12
        assert reports[1].final_deviation == 0.0

    def test_default_sequences_on_grid(self):
        space = OutcomeSpace.grid(1.0, 0.5)
        increasing, to_empty, to_atom = default_refinement_sequences(space)
        assert len(increasing.events[-1]) == space.size
        assert len(to_empty.events[-1]) == 0
        assert len(to_atom.events[-1]) == 1

    def test_rejects_non_monotone_sequence(self):
        space = OutcomeSpace.points(3)
        with pytest.raises(InvalidRefinementError) as exc:
            RefinementSequence([space.event([0, 1]), space.event([0])], "increasing")
        assert exc.value.step == 1
        with pytest.raises(InvalidRefinementError):
            RefinementSequence([space.event([0, 1])], "decreasing-to-empty")
        with pytest.raises(InvalidRefinementError):
            RefinementSequence([space.event([0])], "sideways")

    def test_point_shrinking_family(self):
        family = coherent_family()
        sequence = point_shrinking_sequence(family, (0.1, 0.1))
        assert sequence.is_family
        report = refinement_check(family, sequence)
        assert report.dominated
        assert report.deviations == pytest.approx([h * h / np.pi for h in (1.0, 0.5, 0.25)])
        assert report.deviations[-1] < report.deviations[0]

    def test_point_outside_grid(self):
        with pytest.raises(InvalidRefinementError):
            point_shrinking_sequence(coherent_family((1.0, 0.5)), (5.0, 0.0))

    def test_family_requires_one_povm_per_level(self):
        family = coherent_family()
        sequence = point_shrinking_sequence(family, (0.1, 0.1))
        with pytest.raises(InvalidRefinementError):
            refinement_check(family[:2], sequence)

    def test_absolute_continuity_audit(self, tilted_fiducial):
        povm = build_wh_povm(2, tilted_fiducial)
        audit = absolute_continuity_audit(povm, [e.event for e in enumerate_events(povm.space)])
        assert audit.constant == pytest.approx(1.0)
        assert audit.checked == 16
        assert audit.passed

    def test_audit_without_finite_constant(self):
        povm = DiscretePOVM.from_rank_one(OutcomeSpace.points(2, weight=0.0), [1.0, 1.0], np.eye(2))
        audit = absolute_continuity_audit(povm, [povm.space.full_event()])
        assert not audit.passed
        assert audit.max_excess == float("inf")


class TestScaling:
    """Tests de la ley de escala de celdas."""

    def test_renormalized_slope_is_one(self):
        fit = cell_shrink_scaling(coherent_family())
        assert fit.slope == pytest.approx(1.0, abs=1e-9)
        assert fit.in_range
        assert [lvl["cell_size"] for lvl in fit.levels] == [1.0, 0.5, 0.25]

    def test_tracked_point(self):
        fit = cell_shrink_scaling(coherent_family(), point=(0.1, 0.1))
        assert fit.slope == pytest.approx(1.0, abs=1e-9)
        with pytest.raises(RejectedInputError) as exc:
            cell_shrink_scaling(coherent_family((1.0, 0.5)), point=(9.0, 9.0))
        assert exc.value.reason == "out_of_grid"

    def test_requires_two_levels(self):
        with pytest.raises(InsufficientLevelsError):
            cell_shrink_scaling(coherent_family((0.5,)))


class TestJointBound:
    """Tests de la cota de localización conjunta."""

    def test_basis_fiducial_bound(self, wh_basis_d4):
        result = joint_localization_bound(wh_basis_d4, axis_event(4, [1]), axis_event(4, [0, 1]))
        assert result.norm == pytest.approx(0.5)
        assert result.measure == pytest.approx(0.5)
        assert result.bound == pytest.approx(0.5)
        assert np.allclose(np.abs(result.state.amplitudes), [0.0, 1.0, 0.0, 0.0])
        assert result.to_dict()["state"] is not None

    def test_bound_never_exceeds_one(self, wh_basis_d4):
        result = joint_localization_bound(wh_basis_d4, axis_event(4, range(4)), axis_event(4, range(4)))
        assert result.norm == pytest.approx(1.0)
        assert result.bound == 1.0

    def test_requires_product_space(self):
        with pytest.raises(NonProductSpaceError):
            joint_localization_bound(sharp_position_pvm(2), axis_event(2, [0]), axis_event(2, [0]))

    def test_axis_size_mismatch(self, wh_basis_d4):
        with pytest.raises(RejectedInputError) as exc:
            joint_localization_bound(wh_basis_d4, axis_event(3, [0]), axis_event(4, [0]))
        assert exc.value.reason == "dimension_mismatch"


@pytest.mark.slow
class TestCoherentN24Family:
    """Familia coherente N=24, L=4 en modo proyección con h ∈ {0.4, 0.2, 0.1, 0.05}."""

    def setup_method(self):
        # El defecto de proyección está acotado por 1; en modo renormalize el
        # suelo de traza es |4L²/π - N| / N ≈ 0.151
        self.family = [
            build_coherent_povm(CoherentGrid(24, 4.0, h), truncation="project", threshold=1.0)
            for h in (0.4, 0.2, 0.1, 0.05)
        ]

    def test_cell_norm_scales_with_measure(self):
        fit = cell_shrink_scaling(self.family)
        assert fit.slope == pytest.approx(1.0, abs=1e-9)
        assert fit.in_range
        norms = [lvl["cell_norm"] for lvl in fit.levels]
        assert norms == sorted(norms, reverse=True)
        assert norms[-1] == pytest.approx(0.05 ** 2 / np.pi, rel=1e-9)

    def test_necessary_condition_excludes_norm1(self):
        trend = necessary_condition_family(self.family)
        assert trend.verdict == "norm-1-excluded"
        assert trend.slope == pytest.approx(1.0, abs=1e-9)
        ceilings = [lvl["atom_norm_ceiling"] for lvl in trend.levels]
        assert all(later < earlier for earlier, later in zip(ceilings, ceilings[1:]))
        assert ceilings[-1] < 1e-3
