"""Feasibility battery: exact conditions, Krein-side conditions, fusions."""

import json

import pytest
from fractions import Fraction

from hypothesis import given, settings, strategies as st
from mpmath import mp

from sitawim.errors import SitawimError
from sitawim.feasibility import (
    CONDITIONS,
    ConditionResult,
    FeasibilityReport,
    absolute_bound,
    closed_subsets_quotients,
    condition_grid,
    fusion_check,
    gegenbauer,
    handshake,
    krein_nonneg,
    quotient_data,
    run_battery,
    sub_instance,
    triangle_count,
)
from sitawim.feasibility import _closed_subsets, _structural_star
from sitawim.spectra import SpectralData, eigenmatrix_P, eigenmatrix_Q, krein
from sitawim.structcheck import Instance, IntPoly, verify_sita

from _fixtures import A1_16_MATRICES, N35_MATRICES, N249_MATRICES


def complete_graph(n):
    return Instance([[[1, 0], [0, 1]], [[0, n - 1], [1, n - 2]]])


def cyclic_group_table(n):
    """Regular representation of Z/n as a table: b_j b_k = b_{j+k mod n}."""
    return Instance(
        [
            [[int(i == (j + k) % n) for k in range(n)] for i in range(n)]
            for j in range(n)
        ]
    )


def full(inst, **kw):
    return krein(eigenmatrix_Q(eigenmatrix_P(inst, **kw), inst), inst)


# A realizable-shaped rank-3 table with an odd handshake product:
# (b_1)_{1,2} = 1 and k_2 = 5.
HANDSHAKE_FAIL = Instance(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 3, 0], [3, 1, 1], [0, 1, 3]],
        [[0, 0, 5], [0, 1, 3], [1, 3, 3]],
    ]
)

# Rank-3 table with t_1 = 5 * 1 / 6 (not an integer); {0,1} is kept
# non-closed and every handshake product even so the battery reaches the
# triangle condition.
TRIANGLE_FAIL = Instance(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [1, 1, 0], [0, 1, 1]],
        [[0, 0, 3], [0, 0, 1], [1, 2, 1]],
    ]
)

# {0,1} is closed with a Z/2 sub-table, but the quotient block {2} has
# degree sum 3 over a subset of order 2.
QUOTIENT_DEGREE_FAIL = Instance(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [1, 0, 0], [0, 0, 1]],
        [[0, 0, 3], [0, 0, 3], [1, 1, 1]],
    ]
)

# {0,1} is closed but its sub-table breaks the degree bookkeeping
# (b_1 * b_1 = b_0 + b_1 with k_1 = 1).
SUBTABLE_FAIL = Instance(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 1, 0], [1, 1, 0], [0, 0, 1]],
        [[0, 0, 3], [0, 0, 3], [1, 1, 2]],
    ]
)


@pytest.fixture(scope="module")
def n35():
    return Instance(N35_MATRICES)


@pytest.fixture(scope="module")
def n249():
    return Instance(N249_MATRICES)


@pytest.fixture(scope="module")
def a1_16():
    return Instance(A1_16_MATRICES)


@pytest.fixture(scope="module")
def sd35(n35):
    return full(n35)


@pytest.fixture(scope="module")
def sd249(n249):
    return full(n249)


@pytest.fixture(scope="module")
def rep35(n35, sd35):
    return run_battery(n35, sd35)


@pytest.fixture(scope="module")
def rep249(n249, sd249):
    return run_battery(n249, sd249)


def fabricated_sd(krein_tensor, Q0, eps=None):
    """Hand-built rank-len(Q0) spectral data for condition unit tests."""
    r = len(Q0)
    P = tuple(tuple(mp.mpf(1) for _ in range(r)) for _ in range(r))
    Q = (tuple(mp.mpf(v) for v in Q0),) + tuple(
        tuple(mp.mpf(0) for _ in range(r)) for _ in range(r - 1)
    )
    kr = tuple(
        tuple(tuple(mp.mpf(v) for v in row) for row in plane)
        for plane in krein_tensor
    )
    return SpectralData(
        precision=53,
        eps=mp.mpf(2) ** -30 if eps is None else eps,
        P=P,
        orbits=tuple((i,) for i in range(r)),
        orbit_polys=tuple(IntPoly((-1, 1)) for _ in range(r)),
        Q=Q,
        krein=kr,
    )


class TestReportShape:
    def test_duplicate_condition_rejected(self):
        c = ConditionResult("handshake", "pass")
        with pytest.raises(SitawimError):
            FeasibilityReport(conditions=(c, c), eps=None, lmax=None)

    def test_fail_without_witness_rejected(self):
        c = ConditionResult("handshake", "fail")
        with pytest.raises(SitawimError):
            FeasibilityReport(conditions=(c,), eps=None, lmax=None)

    def test_lookup(self, rep35):
        assert rep35.condition("handshake").verdict == "pass"
        assert rep35["triangle-count"].verdict == "pass"
        with pytest.raises(KeyError):
            rep35.condition("no-such-condition")

    def test_every_condition_present_once(self, rep35):
        assert tuple(c.name for c in rep35.conditions) == CONDITIONS

    def test_json_serializable(self, rep35):
        text = json.dumps(rep35.as_dict())
        assert "handshake" in text

    def test_grid(self, rep35, rep249):
        grid = condition_grid({"n35": rep35, "n249": rep249})
        for name in CONDITIONS:
            assert name in grid
        assert "n35" in grid and "n249" in grid and "vacuous" in grid


class TestHandshake:
    def test_rank2_vacuous(self):
        assert handshake(complete_graph(9)).verdict == "vacuous"

    def test_order35_passes_all_pairs(self, n35):
        res = handshake(n35)
        assert res.verdict == "pass"
        assert res.detail == {"pairs": 12}

    def test_order249_passes(self, n249):
        assert handshake(n249).verdict == "pass"

    def test_odd_product_fails_with_witness(self):
        res = handshake(HANDSHAKE_FAIL)
        assert res.verdict == "fail"
        assert res.witness == {"i": 1, "j": 2, "entry": 1, "degree": 5}

    def test_asymmetric_pairs_exempt(self, a1_16):
        # realizable table whose only symmetric nontrivial element is b_1:
        # no eligible pair, even though (b_2)_{2,3} * k_3 = 5 is odd
        assert a1_16.matrices[2][2][3] * a1_16.degrees[3] == 5
        assert handshake(a1_16).verdict == "vacuous"

    def test_group_table_vacuous(self):
        assert handshake(cyclic_group_table(3)).verdict == "vacuous"


class TestTriangleCount:
    def test_complete_graph_exact(self):
        res = triangle_count(complete_graph(7))
        assert res.verdict == "pass"
        assert res.detail == {1: 35}

    @given(st.integers(min_value=3, max_value=60))
    def test_complete_graph_formula(self, n):
        res = triangle_count(complete_graph(n))
        assert res.verdict == "pass"
        assert res.detail == {1: n * (n - 1) * (n - 2) // 6}

    def test_order35_counts(self, n35):
        res = triangle_count(n35)
        assert res.verdict == "pass"
        assert res.detail == {1: 0, 2: 175, 3: 280, 4: 210}

    def test_order249_counts(self, n249):
        res = triangle_count(n249)
        assert res.verdict == "pass"
        assert res.detail == {1: 38595, 2: 46314, 3: 46314, 4: 41168}

    def test_fractional_count_fails(self):
        res = triangle_count(TRIANGLE_FAIL)
        assert res.verdict == "fail"
        assert res.witness == {"j": 1, "count": "5/6"}

    def test_asymmetric_elements_exempt(self, a1_16):
        res = triangle_count(a1_16)
        assert res.verdict == "pass"
        assert res.detail == {1: 0}

    def test_group_table_vacuous(self):
        # Z/3 is realizable yet n * (b_1^3)_{0,0} / 6 = 1/2: the condition
        # must not constrain directed elements
        res = triangle_count(cyclic_group_table(3))
        assert res.verdict == "vacuous"
        assert res.detail == {}


class TestClosedSubsets:
    def test_order35_lattice_and_quotient(self, n35):
        res = closed_subsets_quotients(n35)
        assert res.verdict == "pass"
        assert res.detail["lattice"] == ((0,), (0, 2), (0, 1, 2, 3, 4))
        (q,) = res.detail["quotients"]
        assert q["subset"] == (0, 2)
        assert q["blocks"] == ((0, 2), (1, 3, 4))
        assert q["rank"] == 2
        assert q["degrees"] == (1, 4)

    def test_order249_primitive(self, n249):
        res = closed_subsets_quotients(n249)
        assert res.verdict == "vacuous"
        assert res.detail["lattice"] == ((0,), (0, 1, 2, 3, 4))

    def test_asymmetric_primitive(self, a1_16):
        assert closed_subsets_quotients(a1_16).verdict == "vacuous"

    def test_group_table_subgroup_lattice(self):
        res = closed_subsets_quotients(cyclic_group_table(6))
        assert res.verdict == "pass"
        assert res.detail["lattice"] == (
            (0,),
            (0, 3),
            (0, 2, 4),
            (0, 1, 2, 3, 4, 5),
        )

    def test_lattice_closed_under_intersection(self, n35):
        for inst in (n35, cyclic_group_table(6), cyclic_group_table(12)):
            lattice = _closed_subsets(inst)
            as_sets = [set(S) for S in lattice]
            for A in as_sets:
                for B in as_sets:
                    assert tuple(sorted(A & B)) in lattice

    def test_subtable_axiom_failure(self):
        res = closed_subsets_quotients(SUBTABLE_FAIL)
        assert res.verdict == "fail"
        assert res.witness["kind"] == "subtable-axioms"
        assert res.witness["subset"] == (0, 1)

    def test_quotient_degree_failure(self):
        res = closed_subsets_quotients(QUOTIENT_DEGREE_FAIL)
        assert res.verdict == "fail"
        assert res.witness["kind"] == "quotient-degree"
        assert res.witness["subset"] == (0, 1)
        assert res.witness["degree"] == "3/2"

    def test_sub_instance_of_order35_is_complete_graph(self, n35):
        sub = sub_instance(n35, (0, 2))
        assert sub.matrices == complete_graph(7).matrices
        assert verify_sita(sub).passed

    def test_sub_instance_rejects_non_closed(self, n35):
        with pytest.raises(SitawimError):
            sub_instance(n35, (0, 1))
        with pytest.raises(SitawimError):
            sub_instance(n35, (2, 3))

    def test_sub_instance_induced_star(self):
        z6 = cyclic_group_table(6)
        sub = sub_instance(z6, (0, 2, 4))
        assert sub.star == (0, 2, 1)
        assert verify_sita(sub).passed

    def test_quotient_of_order35_is_complete_graph_on_5(self, n35):
        blocks, degrees, constants = quotient_data(n35, (0, 2))
        assert blocks == ((0, 2), (1, 3, 4))
        assert degrees == (Fraction(1), Fraction(4))
        # \hat{b}_1^2 = 4 \hat{b}_0 + 3 \hat{b}_1: the order-5 complete graph
        assert constants[1][0][1] == 4
        assert constants[1][1][1] == 3

    def test_quotient_of_group_by_subgroup(self):
        z6 = cyclic_group_table(6)
        blocks, degrees, constants = quotient_data(z6, (0, 2, 4))
        assert blocks == ((0, 2, 4), (1, 3, 5))
        assert degrees == (Fraction(1), Fraction(1))
        assert constants[1][0][1] == 1 and constants[1][1][1] == 0


class TestAbsoluteBound:
    def test_reference_instances_pass(self, sd35, sd249):
        assert absolute_bound(sd35).verdict == "pass"
        assert absolute_bound(sd249).verdict == "pass"

    def test_order35_support_trimming(self, sd35):
        # kappa_{1,1,k} vanishes for k >= 2, so the (1,1) support has
        # multiplicity sum 1 + 4 = 5 <= 10; without the zeros the sum 35
        # would breach the bound
        with mp.workprec(sd35.precision + 32):
            support = [
                k for k in range(5) if abs(sd35.krein[1][k][1]) > mp.mpf(10) ** -20
            ]
        assert support == [0, 1]

    def test_overfull_support_fails(self):
        sd = fabricated_sd(
            [
                [[1, 0], [0, 1]],
                [[0, 1], [1, 1]],
            ],
            Q0=(1, 1),
        )
        res = absolute_bound(sd)
        assert res.verdict == "fail"
        w = res.witness
        assert (w["i"], w["j"]) == (1, 1)
        assert w["total"] == 2.0 and w["bound"] == 1.0

    def test_near_zero_band_warns(self):
        sd = fabricated_sd(
            [
                [[1, 0], [0, 1]],
                [[0, 1e-18], [1, 1]],
            ],
            Q0=(1, 2),
        )
        res = absolute_bound(sd)
        assert res.verdict == "warning"
        assert (1, 1, 0) in res.witness["near-zero"]

    def test_eps_reclassifies_band_as_zero(self):
        sd = fabricated_sd(
            [
                [[1, 0], [0, 1]],
                [[0, 1e-18], [1, 1]],
            ],
            Q0=(1, 2),
        )
        assert absolute_bound(sd, eps=mp.mpf("1e-16")).verdict == "pass"

    def test_requires_krein(self, n35):
        sd = eigenmatrix_P(n35)
        with pytest.raises(SitawimError):
            absolute_bound(sd)


class TestKreinNonneg:
    def test_reference_instances_pass(self, sd35, sd249):
        assert krein_nonneg(sd35).verdict == "pass"
        assert krein_nonneg(sd249).verdict == "pass"

    def test_negative_entry_fails_with_worst_witness(self):
        sd = fabricated_sd(
            [
                [[1, 0], [0, 1]],
                [[-0.1, 1], [-0.2, 1]],
            ],
            Q0=(1, 2),
        )
        res = krein_nonneg(sd)
        assert res.verdict == "fail"
        w = res.witness
        # krein[1][1][0] = -0.2 is the most negative: i=1, k=1, j=0
        assert (w["i"], w["j"], w["k"]) == (1, 0, 1)
        assert abs(w["value"] + 0.2) < 1e-12

    def test_eps_tolerates_dust(self):
        sd = fabricated_sd(
            [
                [[1, 0], [0, 1]],
                [[-1e-40, 1], [0, 1]],
            ],
            Q0=(1, 2),
        )
        assert krein_nonneg(sd).verdict == "pass"
        assert krein_nonneg(sd, eps=mp.mpf("1e-45")).verdict == "fail"


class TestGegenbauer:
    def test_order35_shortcut_autodetected(self, sd35):
        res = gegenbauer(sd35, 1)
        assert res.verdict == "pass"
        assert res.detail == {"i": 1, "bound": 20, "first_column_only": True}

    def test_order35_full_matrix_for_other_indices(self, sd35):
        for i in (2, 3, 4):
            res = gegenbauer(sd35, i)
            assert res.verdict == "pass"
            assert res.detail["first_column_only"] is False

    def test_order35_shortcut_not_load_bearing(self, sd35):
        res = gegenbauer(sd35, 1, first_column_only=False)
        assert res.verdict == "pass"

    def test_order35_documented_threshold(self, sd35):
        res = gegenbauer(sd35, 2, lstar=7)
        assert res.verdict == "pass"
        assert res.detail["bound"] == 7

    def test_order249_passes(self, sd249):
        for i in range(1, 5):
            res = gegenbauer(sd249, i)
            assert res.verdict == "pass"
            assert res.detail["bound"] == 124

    def test_nonreal_row_vacuous(self, a1_16):
        sd = full(a1_16)
        assert gegenbauer(sd, 1).verdict == "pass"
        assert gegenbauer(sd, 2).verdict == "vacuous"
        assert gegenbauer(sd, 3).verdict == "vacuous"
        assert gegenbauer(sd, 2).detail["reason"] == "nonreal character row"

    def test_level_one_is_krein_nonnegativity(self, sd35, sd249):
        for sd in (sd35, sd249):
            assert krein_nonneg(sd).verdict == "pass"
            for i in range(1, sd.rank):
                res = gegenbauer(sd, i, lmax=1, first_column_only=False)
                assert res.verdict == "pass"

    def test_level_one_fails_with_krein_nonnegativity(self):
        sd = fabricated_sd(
            [
                [[1, 0], [0, 1]],
                [[-0.1, 1], [1, 1]],
            ],
            Q0=(1, 2),
        )
        assert krein_nonneg(sd).verdict == "fail"
        res = gegenbauer(sd, 1, lmax=1, first_column_only=False)
        assert res.verdict == "fail"
        assert res.witness["l"] == 1

    def test_index_validation(self, sd35):
        with pytest.raises(SitawimError):
            gegenbauer(sd35, 0)
        with pytest.raises(SitawimError):
            gegenbauer(sd35, 5)

    def test_requires_krein(self, n35):
        with pytest.raises(SitawimError):
            gegenbauer(eigenmatrix_P(n35), 1)


class TestBattery:
    def test_order35_all_pass(self, rep35):
        assert rep35.passed
        assert [c.verdict for c in rep35.conditions] == ["pass"] * 6

    def test_order249_passes_with_vacuous_subsets(self, rep249):
        assert rep249.passed
        verdicts = {c.name: c.verdict for c in rep249.conditions}
        assert verdicts["closed-subsets"] == "vacuous"
        assert all(
            v == "pass" for n, v in verdicts.items() if n != "closed-subsets"
        )

    def test_realizable_asymmetric_table_passes(self, a1_16):
        rep = run_battery(a1_16)
        assert rep.passed
        verdicts = {c.name: c.verdict for c in rep.conditions}
        assert verdicts["handshake"] == "vacuous"
        assert verdicts["triangle-count"] == "pass"
        assert verdicts["gegenbauer"] == "pass"

    def test_group_tables_pass(self):
        # realizable by construction; ranks 3..5 stay inside the battery's
        # factorization scope and exercise the complex-character path
        for n in (3, 4, 5):
            assert run_battery(cyclic_group_table(n)).passed

    @settings(max_examples=8, deadline=None)
    @given(st.integers(min_value=4, max_value=40))
    def test_complete_graphs_pass(self, n):
        assert run_battery(complete_graph(n)).passed

    def test_stop_on_fail_skips_later_conditions(self):
        rep = run_battery(TRIANGLE_FAIL)
        assert not rep.passed
        assert [c.verdict for c in rep.conditions] == [
            "pass",
            "vacuous",
            "fail",
            "skipped",
            "skipped",
            "skipped",
        ]
        assert rep.failing()[0].name == "triangle-count"

    def test_failing_report_serializes(self):
        rep = run_battery(TRIANGLE_FAIL)
        text = json.dumps(rep.as_dict())
        assert "5/6" in text

    def test_precomputed_spectral_data_matches(self, n35, sd35, rep35):
        fresh = run_battery(n35)
        assert [c.verdict for c in fresh.conditions] == [
            c.verdict for c in rep35.conditions
        ]

    def test_partial_spectral_data_upgraded(self, n35, rep35):
        rep = run_battery(n35, eigenmatrix_P(n35))
        assert rep.passed
        assert [c.verdict for c in rep.conditions] == [
            c.verdict for c in rep35.conditions
        ]


class TestStructuralStar:
    def test_symmetric(self, n35):
        assert _structural_star(n35.matrices) == (0, 1, 2, 3, 4)

    def test_conjugate_pair(self, a1_16):
        assert _structural_star(a1_16.matrices) == (0, 1, 3, 2)

    def test_group_table(self):
        assert _structural_star(cyclic_group_table(6).matrices) == (
            0,
            5,
            4,
            3,
            2,
            1,
        )


class TestFusion:
    def test_orbit_fusion_gives_complete_graph(self, n249, sd249):
        res = fusion_check(n249, sd249, [(0,), (1, 2, 3, 4)])
        assert res.fuses and res.verdict == "pass" and res.ok
        assert res.fused.matrices == complete_graph(249).matrices
        assert res.dual_partition == ((0,), (1, 2, 3, 4))
        with mp.workprec(sd249.precision + 32):
            assert abs(res.P_tilde[0][1] - 248) < mp.mpf(10) ** -20
            assert abs(res.P_tilde[1][1] + 1) < mp.mpf(10) ** -20

    def test_order35_full_fusion(self, n35, sd35):
        res = fusion_check(n35, sd35, [(0,), (1, 2, 3, 4)])
        assert res.verdict == "pass"
        assert res.fused.matrices == complete_graph(35).matrices

    def test_identity_partition_is_trivial_fusion(self, n35, sd35):
        res = fusion_check(n35, sd35, [(i,) for i in range(5)])
        assert res.verdict == "pass"
        assert res.fused.matrices == n35.matrices
        assert all(len(g) == 1 for g in res.dual_partition)

    def test_non_fusing_partition(self, n35, sd35):
        res = fusion_check(n35, sd35, [(0,), (1, 2), (3, 4)])
        assert not res.fuses
        assert res.verdict == "not_a_fusion"
        assert not res.ok
        assert "uneven" in res.witness
        assert res.fused is None

    def test_conjugate_pair_fusion_symmetrizes(self, a1_16):
        sd = full(a1_16)
        res = fusion_check(a1_16, sd, [(0,), (1,), (2, 3)])
        assert res.verdict == "pass"
        assert res.fused.matrices == (
            ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
            ((0, 5, 0), (1, 0, 4), (0, 2, 3)),
            ((0, 0, 10), (0, 4, 6), (1, 3, 6)),
        )
        # the conjugate character rows fuse into one real row
        assert res.dual_partition == ((0,), (1,), (2, 3))
        with mp.workprec(sd.precision + 32):
            row = res.P_tilde[1]
            assert max(abs(mp.im(v)) for v in row) < sd.eps

    def test_mixed_pair_does_not_fuse(self, a1_16):
        sd = full(a1_16)
        res = fusion_check(a1_16, sd, [(0,), (1, 2), (3,)])
        assert res.verdict == "not_a_fusion"

    def test_group_inverse_pairing_fuses(self):
        z3 = cyclic_group_table(3)
        sd = full(z3)
        res = fusion_check(z3, sd, [(0,), (1, 2)])
        assert res.verdict == "pass"
        assert res.fused.matrices == complete_graph(3).matrices

    def test_partition_validation(self, n35, sd35):
        with pytest.raises(SitawimError):
            fusion_check(n35, sd35, [(0, 1), (2, 3, 4)])  # 0 not alone
        with pytest.raises(SitawimError):
            fusion_check(n35, sd35, [(0,), (1, 2)])  # not a cover
        with pytest.raises(SitawimError):
            fusion_check(n35, sd35, [(0,), (1, 2), (2, 3, 4)])  # overlap

    def test_row_sums_constant_on_dual_blocks(self, n249, sd249):
        # the row-sum identity behind the dual grouping, checked explicitly
        res = fusion_check(n249, sd249, [(0,), (1, 2, 3, 4)])
        with mp.workprec(sd249.precision + 32):
            for I, want in zip(res.dual_partition, res.P_tilde):
                for i in I:
                    for bj, J in enumerate(res.partition):
                        got = sum(sd249.P[i][j] for j in J)
                        assert abs(got - want[bj]) <= sd249.eps * 249
