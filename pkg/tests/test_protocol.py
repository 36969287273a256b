import io
import math
from functools import lru_cache

import numpy as np
import pytest

from qkd2way.attacks import AttackParams
from qkd2way.protocol import ProtocolConfig, RoundRecord, Tallies, run, tally, write_round_log
from qkd2way.qsim import Basis, prepare


def test_config_validation():
    with pytest.raises(ValueError):
        ProtocolConfig(protocol="e91")
    with pytest.raises(ValueError):
        ProtocolConfig(control_prob=1.5)
    with pytest.raises(ValueError):
        ProtocolConfig(rounds=0)
    with pytest.raises(ValueError):
        ProtocolConfig(reveal_fraction=0.0)


def test_record_mode_invariants():
    with pytest.raises(ValueError):
        RoundRecord(mode="EM", bob_basis=Basis.Z, bob_bit=0)  # missing alice_op
    with pytest.raises(ValueError):
        RoundRecord(mode="CM", bob_basis=Basis.Z, bob_bit=0, alice_op=1,
                    alice_cm_basis=Basis.Z, alice_cm_outcome=0)
    with pytest.raises(ValueError):
        RoundRecord(mode="??", bob_basis=Basis.Z, bob_bit=0)


@lru_cache(maxsize=None)
def _noiseless_run():
    config = ProtocolConfig(protocol="lm05", rounds=20_000, seed=3,
                            control_prob=0.0, reveal_fraction=1.0)
    return config, run(config)


def test_noiseless_determinism_over_all_state_op_pairs():
    _, records = _noiseless_run()
    combos = {(r.bob_basis, r.bob_bit, r.alice_op) for r in records}
    assert len(combos) == 8
    assert all(r.decoded_op == r.alice_op for r in records)


def test_noiseless_tally_is_error_free():
    _, records = _noiseless_run()
    t = tally(records)
    assert t.q_ab == (0, len(records))
    assert t.q_ae == (0, 0) and t.q_be == (0, 0)


def test_control_mode_fraction_matches_probability():
    n = 100_000
    config = ProtocolConfig(protocol="lm05", rounds=n, seed=5, control_prob=0.25)
    records = run(config)
    cm = sum(r.mode == "CM" for r in records)
    assert abs(cm / n - 0.25) <= 5.0 * math.sqrt(0.25 * 0.75 / n)
    assert all(r.bob_outcome is None for r in records if r.mode == "CM")


def test_same_seed_reproduces_round_sequence():
    config = ProtocolConfig(protocol="lm05", rounds=3_000, seed=17)
    attack = AttackParams(kind="ir", xi=0.7)
    assert run(config, attack) == run(config, attack)


def test_different_seed_changes_round_sequence():
    a = run(ProtocolConfig(protocol="lm05", rounds=500, seed=1))
    b = run(ProtocolConfig(protocol="lm05", rounds=500, seed=2))
    assert a != b


def test_basis_blindness_average_state_is_basis_independent():
    # what leaves Bob's station averages to the maximally mixed state in
    # either basis, so the forward state carries no basis information
    def average_density(basis):
        rho = np.zeros((2, 2), dtype=complex)
        for bit in (0, 1):
            amps = prepare(basis, bit).amps
            rho += 0.5 * np.outer(amps, amps.conj())
        return rho
    assert np.allclose(average_density(Basis.Z), np.eye(2) / 2, atol=1e-12)
    assert np.allclose(average_density(Basis.Z), average_density(Basis.X), atol=1e-12)


def test_tally_counting_rules_on_hand_built_records():
    z, x = Basis.Z, Basis.X
    records = [
        # matched-basis CM with wrong outcome: q1 error
        RoundRecord(mode="CM", bob_basis=z, bob_bit=0, alice_cm_basis=z, alice_cm_outcome=1),
        # matched-basis CM, correct
        RoundRecord(mode="CM", bob_basis=x, bob_bit=1, alice_cm_basis=x, alice_cm_outcome=1),
        # mismatched CM never counted
        RoundRecord(mode="CM", bob_basis=z, bob_bit=0, alice_cm_basis=x, alice_cm_outcome=1),
        # revealed EM with decode error (outcome 0 -> decoded 0 != op 1), Eve right about Alice
        RoundRecord(mode="EM", bob_basis=z, bob_bit=0, alice_op=1, bob_outcome=0,
                    revealed=True, eve_alice_guess=1, eve_bob_guess=1, attacked=True),
        # unrevealed EM, Eve wrong about Alice, right about the key bit
        RoundRecord(mode="EM", bob_basis=z, bob_bit=1, alice_op=0, bob_outcome=1,
                    revealed=False, eve_alice_guess=1, eve_bob_guess=0, attacked=True),
        # EM without any Eve guesses
        RoundRecord(mode="EM", bob_basis=x, bob_bit=0, alice_op=0, bob_outcome=0, revealed=False),
    ]
    t = tally(records)
    assert t.q1 == (1, 2)
    assert t.q_ab == (1, 1)
    assert t.q_ae == (1, 2)
    assert t.q_be == (1, 2)


def test_tally_empty_input():
    t = tally([])
    assert t == Tallies()
    assert t.rate("q1") is None


def test_tallies_validation_and_merge():
    with pytest.raises(ValueError):
        Tallies(q1=(2, 1))
    a = Tallies(q1=(1, 10), q_ab=(0, 5))
    b = Tallies(q1=(2, 20), q_be=(3, 7))
    merged = a + b
    assert merged.q1 == (3, 30) and merged.q_ab == (0, 5) and merged.q_be == (3, 7)


def test_bb84_noiseless_sifting():
    n = 40_000
    config = ProtocolConfig(protocol="bb84", rounds=n, seed=21)
    records = run(config)
    t = tally(records)
    # about half the rounds survive sifting, none carry errors
    assert t.q1[0] == 0
    assert abs(t.q1[1] / n - 0.5) <= 5.0 * math.sqrt(0.25 / n)
    assert t.q_ab == (0, 0) and t.q_ae == (0, 0) and t.q_be == (0, 0)


def test_bb84_intercept_resend_rates():
    n = 150_000
    config = ProtocolConfig(protocol="bb84", rounds=n, seed=22)
    t = tally(run(config, AttackParams(kind="ir")))
    sigma = math.sqrt(0.25 * 0.75 / t.q1[1])
    assert abs(t.rate("q1") - 0.25) <= 5.0 * sigma
    sigma_be = math.sqrt(0.25 * 0.75 / t.q_be[1])
    assert abs(t.rate("q_be") - 0.25) <= 5.0 * sigma_be


def test_bb84_rejects_two_way_attacks():
    config = ProtocolConfig(protocol="bb84", rounds=10, seed=1)
    for kind in ("nort", "dcnot", "dcnot_star"):
        with pytest.raises(ValueError):
            run(config, AttackParams(kind=kind))


def test_round_log_csv_format():
    config = ProtocolConfig(protocol="lm05", rounds=200, seed=8, control_prob=0.5)
    records = run(config, AttackParams(kind="ir", xi=0.5))
    buffer = io.StringIO()
    write_round_log(records, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == ("mode,bob_basis,bob_bit,alice_op,alice_cm_basis,alice_cm_outcome,"
                        "bob_outcome,revealed,eve_alice_guess,eve_bob_guess,attacked")
    assert len(lines) == len(records) + 1
    for record, line in zip(records, lines[1:]):
        cells = line.split(",")
        assert cells[0] == record.mode
        if record.mode == "CM":
            assert cells[6] == ""  # lost pulse is an empty cell
            assert cells[3] == ""
        else:
            assert cells[6] == str(record.bob_outcome)
