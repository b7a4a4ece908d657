import numpy as np
import pytest

from probframe.errors import ShapeError, TraceConditionViolated
from probframe.gates import CHANNELS, GATES, KrausChannel, amplitude_damping, depolarizing, gate_matrix, rz


@pytest.mark.parametrize("name", sorted(GATES))
def test_gates_are_unitary(name):
    params = [0.37] * GATES[name].params
    u = gate_matrix(name, params)
    assert u.shape == (2 ** GATES[name].arity,) * 2
    np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-15)


def test_gate_matrix_checks_parameter_count():
    with pytest.raises(ValueError):
        gate_matrix("rx")


def test_rz_is_half_angle_rotation():
    np.testing.assert_allclose(rz(np.pi), np.diag([-1j, 1j]), atol=1e-15)


@pytest.mark.parametrize("name", sorted(CHANNELS))
@pytest.mark.parametrize("param", [0.0, 0.3, 1.0])
def test_channels_satisfy_trace_condition(name, param):
    ch = CHANNELS[name].build(param)
    total = sum(op.conj().T @ op for op in ch.kraus_ops)
    np.testing.assert_allclose(total, np.eye(2), atol=1e-15)


def test_channel_parameter_range():
    with pytest.raises(ValueError):
        depolarizing(1.5)
    with pytest.raises(ValueError):
        amplitude_damping(-0.1)


def test_kraus_channel_rejects_non_trace_preserving():
    with pytest.raises(TraceConditionViolated):
        KrausChannel.from_ops([np.eye(2), np.eye(2)])


def test_kraus_channel_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        KrausChannel.from_ops([np.eye(3)])
    with pytest.raises(ShapeError):
        KrausChannel.from_ops([])
