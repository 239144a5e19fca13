import numpy as np
import pytest

from geroch_pencil import catalog
from geroch_pencil.errors import ConditionVFailure, DimensionMismatch, SingularVelocityAssignment
from geroch_pencil.geroch import project_M
from geroch_pencil.pencil import Sampling
from geroch_pencil.subsidiary import (
    assign_constraint_velocities,
    constraint_of_constraints_check,
    default_velocity_policy,
    inherited_modes,
    jordan_defect,
    subsidiary_kronecker,
    subsidiary_sh_sweep,
    subsidiary_symbol,
)
from geroch_pencil.tensor_core import wave_covector


def test_wave_inherited_modes_follow_shift():
    e = catalog.wave(1.2, (0.3, 0.0, -0.1))
    kk = np.array([0.2, 0.9, 0.4])
    k = wave_covector(kk, normalize=False)
    pi, vecs = inherited_modes(e.symbol, e.named_geroch, e.named_pair, k)
    assert np.allclose(pi, -np.dot([0.3, 0.0, -0.1], kk), atol=1e-10)
    assert vecs.shape == (6, 3)


def test_nfree_shape_is_checked(wave_entry):
    with pytest.raises(DimensionMismatch):
        subsidiary_symbol(wave_entry.named_geroch, wave_entry.named_pair, np.zeros((6, 3)),
                          wave_covector([1.0, 0, 0]))


def test_subsidiary_structure_is_independent_of_nfree(wave_entry, rng):
    e = wave_entry
    k = wave_covector([0.4, -0.2, 0.7])
    a = subsidiary_kronecker(e.symbol, e.named_geroch, e.named_pair, None, k)
    b = subsidiary_kronecker(e.symbol, e.named_geroch, e.named_pair, rng.standard_normal((6, 4)), k)
    assert a.describe() == b.describe() == "3xJ1(0), 3xL1T, 1xL0T"


def test_condition_v_failure_carries_extended_structure(wave_entry):
    e = wave_entry
    dropped = project_M(e.named_geroch.drop_M(3), e.named_pair, e.symbol)
    k = wave_covector([0.3, 0.3, 0.3])
    with pytest.raises(ConditionVFailure) as info:
        subsidiary_kronecker(e.symbol, dropped, e.named_pair, None, k)
    ext = info.value.extended
    assert ext is not None and all(ext.counting_identities())
    assert info.value.deficiency.shape[1] == 1
    with pytest.warns(UserWarning):
        st = subsidiary_kronecker(e.symbol, dropped, e.named_pair, None, k, extend=True)
    assert st.describe() == ext.describe()


def test_velocity_assignment_default_policy(wave_entry):
    e = wave_entry
    k = wave_covector([1.0, 2.0, 2.0])
    sub = assign_constraint_velocities(e.symbol, e.named_geroch, e.named_pair, k)
    rho = default_velocity_policy([0, 0, 0], [1.0, -1.0], 3)
    assert np.allclose(sub.rho_values, rho)
    w = np.sort(np.linalg.eigvals(sub.B).real)
    assert np.allclose(w, np.sort(np.r_[0, 0, 0, rho]), atol=1e-8)
    assert jordan_defect(sub.B) == 0


def test_velocity_assignment_rejects_bad_targets(wave_entry):
    e = wave_entry
    k = wave_covector([0.0, 0.0, 1.0])
    with pytest.raises(SingularVelocityAssignment):
        assign_constraint_velocities(e.symbol, e.named_geroch, e.named_pair, k, rho_targets=(2, 2, 3))
    with pytest.raises(SingularVelocityAssignment):
        assign_constraint_velocities(e.symbol, e.named_geroch, e.named_pair, k, rho_targets=(2, 3))


def test_jordan_defect_on_known_matrices():
    assert jordan_defect(np.array([[1.0, 1.0], [0.0, 1.0]])) == 1
    assert jordan_defect(np.eye(3)) == 0


def test_constant_zero_nfree_sweep(wave_entry):
    e = wave_entry
    rep = subsidiary_sh_sweep(e.symbol, e.named_geroch, e.named_pair, sampling=Sampling(20, 0),
                              constant_N=np.zeros((6, 4)))
    # B reduces to C^i h_delta k_i, which has the zero eigenvalue with a full eigenbasis
    assert rep.mode == "constant" and rep.real


def test_per_k_sweep_is_strongly_hyperbolic(maxwell_entry, wave_entry):
    for e in (maxwell_entry, wave_entry):
        rep = subsidiary_sh_sweep(e.symbol, e.named_geroch, e.named_pair, sampling=Sampling(30, 1))
        assert rep.ss_sh, e.symbol.name


def test_constraints_of_constraints_vanish(wave_entry):
    k = wave_covector([0.6, -0.3, 0.2])
    assert constraint_of_constraints_check(wave_entry.symbol, wave_entry.named_geroch, k) < 1e-12
