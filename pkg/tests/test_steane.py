"""Seven-qubit code: stabilizer data, verified-cat measurement, logical
preparation and measurement, magic states, the teleported T, and syndrome
extraction.  Gate tallies are asserted exactly where the cost model pins
them."""
import numpy as np
import pytest

from bqcsim import simcore as sc
from bqcsim import steane as st
from bqcsim.simcore import OpCounter

import oracles as orc

BLOCK = st.CodeBlock(tuple(range(7)))
CAT = tuple(range(7, 14))
VERIFY = 14


def tally(c: OpCounter):
    return (c.t_gates, c.two_qubit, c.one_qubit, c.measurements)


def word_matrix(word: str) -> np.ndarray:
    mats = {"I": orc.I2, "X": orc.X, "Z": orc.Z}
    out = np.array([[1.0 + 0j]])
    for ch in word:
        out = np.kron(out, mats[ch])
    return out


class TestStabilizerData:
    def test_words_and_supports(self):
        assert st.STABILIZERS["K1"].support == (4, 5, 6, 7)
        assert st.STABILIZERS["K2"].support == (1, 3, 5, 7)
        assert st.STABILIZERS["K3"].support == (2, 3, 6, 7)
        for a, b in zip(("K1", "K2", "K3"), ("K4", "K5", "K6")):
            assert st.STABILIZERS[a].support == st.STABILIZERS[b].support
            assert st.STABILIZERS[a].kind == "X"
            assert st.STABILIZERS[b].kind == "Z"

    def test_all_pairs_commute(self):
        mats = [word_matrix(s.word) for s in st.STABILIZERS.values()]
        for i, a in enumerate(mats):
            for b in mats[i + 1:]:
                assert np.allclose(a @ b, b @ a)

    def test_decode_table_matches_closed_form(self):
        # flagged-set weighting: first bit worth 4, second 1, third 2
        for bits, pos in st.X_SYNDROME_TABLE.items():
            formula = 4 * bits[0] + 1 * bits[1] + 2 * bits[2]
            assert pos == (formula if formula else None)
        assert st.Z_SYNDROME_TABLE == st.X_SYNDROME_TABLE

    def test_logical_basis(self):
        v0, v1 = st.logical_basis_states()
        assert abs(np.vdot(v0, v0) - 1) < 1e-12
        assert abs(np.vdot(v1, v1) - 1) < 1e-12
        assert abs(np.vdot(v0, v1)) < 1e-12
        for s in st.STABILIZERS.values():
            m = word_matrix(s.word)
            assert np.allclose(m @ v0, v0)
            assert np.allclose(m @ v1, v1)
        assert np.allclose(word_matrix(st.X_LOGICAL) @ v0, v1)
        assert np.allclose(word_matrix(st.Z_LOGICAL) @ v1, -v1)

    def test_octant_words_multiply_to_phase(self):
        gates = {"T": orc.T, "S": orc.S, "Z": orc.Z, "SDG": orc.SDG}
        for k, word in st.OCTANT_WORDS.items():
            m = orc.I2
            for letter in word:
                m = m @ gates[letter]
            assert orc.phase_free_equal(m, orc.rz(k))

    def test_code_block_validation(self):
        with pytest.raises(ValueError):
            st.CodeBlock((0, 1, 2, 3, 4, 5))
        with pytest.raises(ValueError):
            st.CodeBlock((0, 1, 2, 3, 4, 5, 5))
        assert BLOCK.wire(1) == 0 and BLOCK.wire(7) == 6
        with pytest.raises(ValueError):
            BLOCK.wire(0)


class TestCat:
    @pytest.mark.parametrize("weight", [2, 4, 7])
    def test_prepared_cat_amplitudes(self, weight, rng):
        state = sc.new_state(weight + 1)
        bit = st.prepare_cat(state, range(weight), weight, rng)
        assert bit == 0
        amp = 1 / np.sqrt(2)
        idx_all = (1 << (weight + 1)) - 2  # all cat wires 1, verify 0
        assert abs(state.amps[0] - amp) < 1e-12
        assert abs(state.amps[idx_all] - amp) < 1e-12
        assert abs(state.norm_sq() - 1) < 1e-12

    def test_weight_budget_enforced(self, rng):
        state = sc.new_state(15)
        with pytest.raises(sc.ResourceLimitError):
            st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K4"],
                                   CAT[:3], VERIFY, rng)

    def test_y_letter_rejected(self, rng):
        state = sc.new_state(15)
        with pytest.raises(ValueError):
            st.ft_measure_operator(state, BLOCK, "IIIYYYY", CAT, VERIFY, rng)


class TestLogicalZero:
    def test_state_and_tally(self):
        seen_corrections = set()
        v0, _ = st.logical_basis_states()
        for seed in range(6):
            rng = np.random.default_rng(seed)
            state = sc.new_state(15)
            ctr = OpCounter()
            rec = st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng, ctr)
            vec, leak = st.decode_to_logical(state, BLOCK)
            assert abs(vec[0]) ** 2 > 1 - 1e-10
            assert leak < 1e-10
            fixes = 0 if rec.correction_position is None else 1
            assert tally(ctr) == (0, 108, 18 + fixes, 18)
            seen_corrections.add(rec.correction_position)
        assert seen_corrections - {None}, "no random sign ever needed fixing"

    def test_measuring_again_is_stable(self, rng):
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        for name in ("K1", "K2", "K3", "K4", "K5", "K6"):
            bit = st.ft_measure_operator(state, BLOCK, st.STABILIZERS[name],
                                         CAT, VERIFY, rng)
            assert bit == 0, name


class TestTransversal:
    def prep_zero(self, n=15, seed=0):
        rng = np.random.default_rng(seed)
        state = sc.new_state(n)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        return state, rng

    def decode1(self, state):
        vec, leak = st.decode_to_logical(state, BLOCK)
        assert leak < 1e-10
        return vec

    def test_x_and_z(self):
        state, _ = self.prep_zero()
        st.transversal_gate(state, BLOCK, "X")
        assert abs(self.decode1(state)[1]) ** 2 > 1 - 1e-10
        st.transversal_gate(state, BLOCK, "Z")
        vec = self.decode1(state)
        assert abs(vec[1]) ** 2 > 1 - 1e-10  # Z only flips the phase

    def test_h_makes_plus(self):
        state, _ = self.prep_zero()
        st.transversal_gate(state, BLOCK, "H")
        vec = self.decode1(state)
        plus = np.array([1, 1]) / np.sqrt(2)
        assert abs(np.vdot(plus, vec)) ** 2 > 1 - 1e-10

    def test_s_convention(self):
        # logical S must advance |+> to the +i axis even though each
        # physical wire gets an S-dagger
        state, _ = self.prep_zero()
        st.transversal_gate(state, BLOCK, "H")
        ctr = OpCounter()
        st.transversal_gate(state, BLOCK, "S", ctr)
        assert tally(ctr) == (0, 0, 7, 0)
        vec = self.decode1(state)
        want = np.array([1, 1j]) / np.sqrt(2)
        assert abs(np.vdot(want, vec)) ** 2 > 1 - 1e-10

    def test_sdg_inverts_s(self):
        state, _ = self.prep_zero()
        st.transversal_gate(state, BLOCK, "H")
        before = state.amps.copy()
        st.transversal_gate(state, BLOCK, "S")
        st.transversal_gate(state, BLOCK, "SDG")
        assert np.allclose(state.amps, before, atol=1e-12)

    def test_cnot_builds_bell_pair(self):
        rng = np.random.default_rng(4)
        state = sc.new_state(22)
        a = st.CodeBlock(tuple(range(7)))
        b = st.CodeBlock(tuple(range(7, 14)))
        cat = tuple(range(14, 21))
        st.prepare_logical_zero(state, a, cat, 21, rng)
        st.prepare_logical_zero(state, b, cat, 21, rng)
        st.transversal_gate(state, a, "H")
        ctr = OpCounter()
        st.transversal_gate(state, (a, b), "CNOT", ctr)
        assert tally(ctr) == (0, 7, 0, 0)
        vec, leak = st.decode_to_logical(state, (a, b))
        assert leak < 1e-10
        bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
        assert abs(np.vdot(bell, vec)) ** 2 > 1 - 1e-10

    def test_unsupported_kind(self):
        state, _ = self.prep_zero()
        with pytest.raises(ValueError):
            st.transversal_gate(state, BLOCK, "T")


class TestMagic:
    def test_state_tally_and_outcomes(self):
        target = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
        outcomes = set()
        for seed in range(10):
            rng = np.random.default_rng(1000 + seed)
            state = sc.new_state(15)
            st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
            ctr = OpCounter()
            bit = st.prepare_magic(state, BLOCK, CAT, VERIFY, rng, ctr)
            outcomes.add(bit)
            fixes = 7 * bit
            assert tally(ctr) == (21, 105, 6 + fixes, 6)
            vec, leak = st.decode_to_logical(state, BLOCK)
            assert leak < 1e-10
            assert abs(np.vdot(target, vec)) ** 2 > 1 - 1e-10
        assert outcomes == {0, 1}, "both projection branches should occur"


class TestMeasZ:
    def test_deterministic_on_basis_states(self):
        for logical, want in ((None, 0), ("X", 1)):
            rng = np.random.default_rng(42)
            state = sc.new_state(15)
            st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
            if logical:
                st.transversal_gate(state, BLOCK, logical)
            ctr = OpCounter()
            bit = st.ft_meas_z(state, BLOCK, CAT, VERIFY, rng, ctr)
            assert bit == want
            assert tally(ctr) == (0, 42, 4, 11)

    def test_mid_gadget_data_flip_outvoted(self):
        # an X landing on the data between repetitions flips the later cat
        # repetition, but the clean first repetition plus the classically
        # corrected transversal readout still carry the majority
        for pos in range(1, 8):
            def hook(rep, attempt, stage, state, cat, verify, pos=pos):
                if rep == 0 and stage == "post_couple":
                    sc.inject_pauli(state, BLOCK.wire(pos), "X")

            rng = np.random.default_rng(pos)
            state = sc.new_state(15)
            st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
            bit = st.ft_meas_z(state, BLOCK, CAT, VERIFY, rng,
                               fault_hook=hook)
            assert bit == 0, pos

    def test_prior_data_flip_shows_in_raw_parity(self):
        # an error already on the block before the gadget is out of
        # contract: the raw operator really is in the -1 eigenvalue, which
        # is why extraction must run before destructive readout
        rng = np.random.default_rng(1)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        sc.inject_pauli(state, BLOCK.wire(3), "X")
        assert st.ft_meas_z(state, BLOCK, CAT, VERIFY, rng) == 1

    def test_born_statistics_on_plus(self):
        ones = 0
        n = 60
        rng = np.random.default_rng(9)
        for _ in range(n):
            state = sc.new_state(15)
            st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
            st.transversal_gate(state, BLOCK, "H")
            ones += st.ft_meas_z(state, BLOCK, CAT, VERIFY, rng)
        assert 10 <= ones <= 50


class TestTGate:
    def test_t_on_plus_gives_magic_and_raw_tally(self):
        target = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
        tallies = set()
        for seed in range(8):
            rng = np.random.default_rng(seed)
            state = sc.new_state(22)
            data = st.CodeBlock(tuple(range(7)))
            magic = st.CodeBlock(tuple(range(7, 14)))
            cat = tuple(range(14, 21))
            st.prepare_logical_zero(state, data, cat, 21, rng)
            st.transversal_gate(state, data, "H")
            ctr = OpCounter()
            st.prepare_logical_zero(state, magic, cat, 21, rng, ctr)
            st.prepare_magic(state, magic, cat, 21, rng, ctr)
            out, _ = st.ft_t_gate(state, data, magic, cat, 21, rng, ctr)
            assert out == magic
            t, two, one, meas = tally(ctr)
            assert (t, two, meas) == (21, 262, 35)
            assert 28 <= one <= 50
            tallies.add(one)
            vec, leak = st.decode_to_logical(state, out)
            assert leak < 1e-10
            assert abs(np.vdot(target, vec)) ** 2 > 1 - 1e-10
        assert len(tallies) > 1, "conditional fixes should vary run to run"

    def test_octant_preparation_all_thetas(self):
        for theta in range(8):
            rng = np.random.default_rng(50 + theta)
            n = 22 if theta % 2 else 15
            state = sc.new_state(n)
            block = st.CodeBlock(tuple(range(7)))
            magic = st.CodeBlock(tuple(range(7, 14))) if theta % 2 else None
            cat = tuple(range(n - 8, n - 1))
            out = st.prepare_plus_theta_logical(state, block, theta, magic,
                                                cat, n - 1, rng)
            assert (out != block) == bool(theta % 2)
            vec, leak = st.decode_to_logical(state, out)
            want = np.array([1, np.exp(1j * theta * np.pi / 4)]) / np.sqrt(2)
            assert leak < 1e-10
            assert abs(np.vdot(want, vec)) ** 2 > 1 - 1e-10, theta

    def test_t_letter_requires_magic_block(self, rng):
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        with pytest.raises(sc.ResourceLimitError):
            st.apply_logical_phase(state, BLOCK, 1, None, CAT, VERIFY, rng)


class TestFaultInjection:
    def test_end_wire_flip_detected_and_retried(self):
        calls = []

        def hook(rep, attempt, stage, state, cat, verify):
            calls.append((rep, attempt, stage))
            if rep == 0 and attempt == 0 and stage == "pre_verify":
                sc.inject_pauli(state, cat[0], "X")

        rng = np.random.default_rng(3)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        bit = st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K1"],
                                     CAT, VERIFY, rng, fault_hook=hook)
        assert bit == 0
        # first repetition needed a second attempt, later ones did not
        assert (0, 1, "pre_verify") in calls
        assert (1, 1, "pre_verify") not in calls

    def test_persistent_fault_escalates(self):
        def hook(rep, attempt, stage, state, cat, verify):
            if rep == 0 and stage == "pre_verify":
                sc.inject_pauli(state, cat[-1], "X")

        rng = np.random.default_rng(3)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        with pytest.raises(st.FaultEscalationError):
            st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K1"],
                                   CAT, VERIFY, rng, fault_hook=hook)

    def test_middle_wire_flip_leaves_one_correctable_error(self):
        def hook(rep, attempt, stage, state, cat, verify):
            if rep == 0 and attempt == 0 and stage == "pre_verify":
                sc.inject_pauli(state, cat[1], "X")

        rng = np.random.default_rng(5)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        bit = st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K1"],
                                     CAT, VERIFY, rng, fault_hook=hook)
        assert bit == 0
        syn = st.extract_and_correct(state, BLOCK, CAT, VERIFY, rng)
        assert not syn.uncorrectable
        vec, leak = st.decode_to_logical(state, BLOCK)
        assert leak < 1e-10 and abs(vec[0]) ** 2 > 1 - 1e-10

    def test_phase_fault_flips_a_single_repetition(self):
        # one repetition, Z after coupling: the report inverts even though
        # the state really is the +1 eigenstate
        def hook(rep, attempt, stage, state, cat, verify):
            if stage == "post_couple":
                sc.inject_pauli(state, cat[2], "Z")

        rng = np.random.default_rng(8)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        bit = st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K1"],
                                     CAT, VERIFY, rng, repetitions=1,
                                     fault_hook=hook)
        assert bit == 1

    @pytest.mark.parametrize("cat_pos", [0, 1, 2, 3])
    def test_majority_overrides_one_bad_repetition(self, cat_pos):
        def hook(rep, attempt, stage, state, cat, verify):
            if rep == 1 and stage == "post_couple":
                sc.inject_pauli(state, cat[cat_pos], "Z")

        rng = np.random.default_rng(11 + cat_pos)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        bit = st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K1"],
                                     CAT, VERIFY, rng, fault_hook=hook)
        assert bit == 0

    def test_amplitude_fault_on_cat_does_not_flip_report(self):
        # X after coupling commutes through the X-basis readout
        def hook(rep, attempt, stage, state, cat, verify):
            if stage == "post_couple":
                sc.inject_pauli(state, cat[1], "X")

        rng = np.random.default_rng(13)
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        bit = st.ft_measure_operator(state, BLOCK, st.STABILIZERS["K1"],
                                     CAT, VERIFY, rng, repetitions=1,
                                     fault_hook=hook)
        assert bit == 0


class TestSyndrome:
    def test_every_single_fault_corrected(self):
        plus = np.array([1, 1]) / np.sqrt(2)
        for pauli in ("X", "Z", "Y"):
            for pos in range(1, 8):
                rng = np.random.default_rng(7 * ord(pauli[0]) + pos)
                state = sc.new_state(15)
                st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
                st.transversal_gate(state, BLOCK, "H")
                sc.inject_pauli(state, BLOCK.wire(pos), pauli)
                syn = st.extract_and_correct(state, BLOCK, CAT, VERIFY, rng)
                assert not syn.uncorrectable
                if pauli in ("Z", "Y"):
                    assert syn.z_correction == pos
                if pauli in ("X", "Y"):
                    assert syn.x_correction == pos
                vec, leak = st.decode_to_logical(state, BLOCK)
                assert leak < 1e-10
                assert abs(np.vdot(plus, vec)) ** 2 > 1 - 1e-10

    def test_clean_state_reports_nothing(self, rng):
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        syn = st.extract_and_correct(state, BLOCK, CAT, VERIFY, rng)
        assert syn == st.Syndrome((0, 0, 0), (0, 0, 0), None, None, False)

    def test_two_site_fault_flagged_uncorrectable(self, rng):
        state = sc.new_state(15)
        st.prepare_logical_zero(state, BLOCK, CAT, VERIFY, rng)
        sc.inject_pauli(state, BLOCK.wire(2), "X")
        sc.inject_pauli(state, BLOCK.wire(5), "Z")
        syn = st.extract_and_correct(state, BLOCK, CAT, VERIFY, rng)
        assert syn.uncorrectable
        assert syn.z_correction == 5 and syn.x_correction == 2


class TestFaultSweep:
    def test_injected_pauli_sweep_over_clifford_octants(self):
        # 84 cases: every single-site fault on every transversally prepared
        # octant state survives one round of extraction
        for theta in (0, 2, 4, 6):
            want = np.array([1, np.exp(1j * theta * np.pi / 4)]) / np.sqrt(2)
            for pauli in ("X", "Y", "Z"):
                for pos in range(1, 8):
                    rng = np.random.default_rng(997 * theta + 31 * pos
                                                + ord(pauli[0]))
                    state = sc.new_state(15)
                    out = st.prepare_plus_theta_logical(
                        state, BLOCK, theta, None, CAT, VERIFY, rng)
                    sc.inject_pauli(state, out.wire(pos), pauli)
                    syn = st.extract_and_correct(state, out, CAT, VERIFY, rng)
                    assert not syn.uncorrectable
                    vec, leak = st.decode_to_logical(state, out)
                    assert leak < 1e-10
                    assert abs(np.vdot(want, vec)) ** 2 > 1 - 1e-10

    def test_fault_after_t_path_preparation(self):
        rng = np.random.default_rng(321)
        state = sc.new_state(22)
        block = st.CodeBlock(tuple(range(7)))
        magic = st.CodeBlock(tuple(range(7, 14)))
        cat = tuple(range(14, 21))
        out = st.prepare_plus_theta_logical(state, block, 1, magic, cat, 21,
                                            rng)
        sc.inject_pauli(state, out.wire(4), "Y")
        syn = st.extract_and_correct(state, out, cat, 21, rng)
        assert not syn.uncorrectable
        assert syn.z_correction == 4 and syn.x_correction == 4
        vec, leak = st.decode_to_logical(state, out)
        want = np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2)
        assert leak < 1e-10
        assert abs(np.vdot(want, vec)) ** 2 > 1 - 1e-10
