"""Tensor primitives: CP evaluation, reconstruction, containers."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorfill.containers import (ContainerError, read_mask, read_tensor,
                                   write_mask, write_tensor)
from tensorfill.tensors import (CPFactors, DenseTensor, ObservationMask,
                                cp_entry, cp_reconstruct, residual_observation,
                                validate_dims)


def make_factors(lam, *mats):
    return CPFactors(np.asarray(lam, dtype=float), [np.asarray(m, dtype=float) for m in mats])


class TestCpEntry:
    def test_zero_weights(self):
        cp = CPFactors(np.zeros(1), [np.ones((3, 1)), np.ones((4, 1))])
        for idx in itertools.product(range(3), range(4)):
            assert cp_entry(cp, idx) == 0.0

    def test_all_ones_factors(self):
        cp = CPFactors(np.array([2.0]), [np.ones((2, 1)), np.ones((2, 1)), np.ones((2, 1))])
        assert cp_entry(cp, (1, 0, 1)) == 2.0

    def test_two_component_hand_value(self):
        # lam=(1,-1), factor rows (2,3) in all modes: 1*2^3 - 1*3^3 = -19
        row = np.array([[2.0, 3.0]])
        cp = make_factors([1.0, -1.0], row, row, row)
        assert cp_entry(cp, (0, 0, 0)) == pytest.approx(-19.0, abs=0)

    def test_out_of_bounds(self):
        cp = CPFactors(np.ones(1), [np.ones((2, 1)), np.ones((2, 1))])
        with pytest.raises(IndexError):
            cp_entry(cp, (2, 0))
        with pytest.raises(IndexError):
            cp_entry(cp, (0, -1))


class TestCpReconstruct:
    def test_zero_weights(self):
        cp = CPFactors(np.zeros(2), [np.random.rand(3, 2), np.random.rand(2, 2)])
        assert np.all(cp_reconstruct(cp).data == 0)

    def test_rank_one_outer_product(self):
        cp = make_factors([1.0], [[1.0], [2.0]], [[3.0], [4.0]])
        np.testing.assert_array_equal(cp_reconstruct(cp).data, [[3.0, 4.0], [6.0, 8.0]])

    def test_matches_entrywise_exhaustive(self):
        rng = np.random.default_rng(5)
        for dims in [(2, 3), (4, 4, 4), (2, 3, 2, 2)]:
            cp = CPFactors(rng.normal(size=3), [rng.normal(size=(n, 3)) for n in dims])
            full = cp_reconstruct(cp)
            for idx in itertools.product(*(range(n) for n in dims)):
                assert full.data[idx] == pytest.approx(cp_entry(cp, idx), rel=1e-12, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_linear_in_weights(self, seed):
        rng = np.random.default_rng(seed)
        dims = (3, 2, 4)
        cp = CPFactors(rng.normal(size=2), [rng.normal(size=(n, 2)) for n in dims])
        doubled = CPFactors(2.0 * cp.lam, cp.factors)
        np.testing.assert_allclose(cp_reconstruct(doubled).data,
                                   2.0 * cp_reconstruct(cp).data, rtol=1e-12)


class TestResidualObservation:
    def test_single_component(self):
        cp = CPFactors(np.array([3.0]), [np.zeros((2, 1)), np.zeros((2, 1))])
        assert residual_observation(2.0, 0.0, cp, (0, 0), 0) == 2.0

    def test_two_components(self):
        cp = CPFactors(np.ones(2), [np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 2))])
        assert residual_observation(5.0, 1.0, cp, (0, 0, 0), 0) == pytest.approx(3.0)

    def test_residual_of_exact_value_is_zero(self):
        cp = CPFactors(np.zeros(1), [np.zeros((2, 1)), np.zeros((2, 1))])
        assert residual_observation(4.0, 4.0, cp, (1, 1), 0) == 0.0

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_reconstruction_identity(self, seed):
        rng = np.random.default_rng(seed)
        dims = (3, 3, 2)
        cp = CPFactors(rng.normal(size=3), [rng.normal(size=(n, 3)) for n in dims])
        idx = tuple(rng.integers(0, n) for n in dims)
        y, e = rng.normal(), rng.normal()
        r = int(rng.integers(0, 3))
        term = cp.lam[r] * np.prod([cp.factors[k][idx[k], r] for k in range(3)])
        rest = residual_observation(y, e, cp, idx, r)
        assert rest + term + e == pytest.approx(y, rel=1e-12, abs=1e-12)

    def test_component_out_of_range(self):
        cp = CPFactors(np.ones(1), [np.ones((2, 1)), np.ones((2, 1))])
        with pytest.raises(IndexError):
            residual_observation(1.0, 0.0, cp, (0, 0), 1)


class TestTypes:
    def test_single_mode_rejected(self):
        with pytest.raises(ValueError):
            validate_dims((5,))
        with pytest.raises(ValueError):
            DenseTensor(np.zeros(4))

    def test_nonpositive_dim_rejected(self):
        with pytest.raises(ValueError):
            validate_dims((3, 0))

    def test_finite_check(self):
        t = DenseTensor(np.ones((2, 2)))
        t.data[0, 0] = np.nan
        with pytest.raises(ValueError):
            t.check_finite()

    def test_mask_count(self):
        flags = np.zeros((3, 4), dtype=bool)
        flags[1, 2] = flags[0, 0] = True
        mask = ObservationMask(flags)
        assert mask.observed_count == 2
        np.testing.assert_array_equal(mask.observed_indices(), [0, 6])

    def test_factor_shape_mismatch(self):
        with pytest.raises(ValueError):
            CPFactors(np.ones(2), [np.ones((3, 2)), np.ones((3, 1))])


class TestContainers:
    def test_tensor_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        t = DenseTensor(rng.normal(size=(3, 4, 2)))
        path = tmp_path / "t.dtc"
        write_tensor(path, t)
        back = read_tensor(path)
        assert back.dims == t.dims
        np.testing.assert_array_equal(back.data, t.data)

    def test_tensor_header_layout(self, tmp_path):
        t = DenseTensor(np.arange(6.0).reshape(2, 3))
        path = tmp_path / "t.dtc"
        write_tensor(path, t)
        raw = path.read_bytes()
        assert raw[:4] == b"DTC1"
        assert raw[4:8] == (2).to_bytes(4, "little")
        assert raw[8:12] == (2).to_bytes(4, "little")
        assert raw[12:16] == (3).to_bytes(4, "little")
        assert np.frombuffer(raw[16:], dtype="<f8")[3] == 3.0

    def test_mask_round_trip(self, tmp_path):
        flags = np.random.default_rng(1).random((4, 5)) < 0.4
        mask = ObservationMask(flags)
        path = tmp_path / "m.dtm"
        write_mask(path, mask)
        back = read_mask(path)
        np.testing.assert_array_equal(back.flags, flags)
        assert path.read_bytes()[:4] == b"DTM1"

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.dtc"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ContainerError):
            read_tensor(path)

    def test_truncated_payload(self, tmp_path):
        t = DenseTensor(np.ones((2, 2)))
        path = tmp_path / "t.dtc"
        write_tensor(path, t)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ContainerError):
            read_tensor(path)

    def test_mask_bad_byte(self, tmp_path):
        path = tmp_path / "m.dtm"
        path.write_bytes(b"DTM1" + (2).to_bytes(4, "little")
                         + (2).to_bytes(4, "little") + (2).to_bytes(4, "little")
                         + bytes([0, 1, 2, 1]))
        with pytest.raises(ContainerError):
            read_mask(path)
