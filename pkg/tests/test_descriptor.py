import numpy as np
import pytest

from rift2 import FormatError, ParameterError
from rift2.descriptor import (Descriptor, describe_plain, describe_rift2,
                              describe_ring, encode, extract_patch,
                              read_descriptors, write_descriptors)
from rift2.detector import Keypoint
from rift2.mim import IndexMap, cyclic_shift


def random_index_map(rng, h=300, w=300):
    return IndexMap(rng.integers(1, 7, size=(h, w)).astype(np.int32),
                    rng.random((h, w)), 6)


def kp(x, y):
    return Keypoint(float(x), float(y), 1.0, "corner")


class TestExtractPatch:
    def test_angle_zero_equals_direct_slice(self, rng):
        mim = random_index_map(rng)
        patch = extract_patch(mim, kp(150, 140), 96, 0.0)
        assert np.array_equal(patch.indices, mim.indices[93:189, 103:199])

    def test_half_turn_equals_rot180(self, rng):
        mim = random_index_map(rng)
        base = extract_patch(mim, kp(150, 140), 96, 0.0)
        rot = extract_patch(mim, kp(150, 140), 96, np.pi)
        assert np.array_equal(rot.indices, base.indices[::-1, ::-1])

    def test_out_of_bounds_is_skip_signal(self, rng):
        mim = random_index_map(rng, 120, 120)
        assert extract_patch(mim, kp(10, 60), 96, 0.0) is None
        # fits axis-aligned but not rotated
        assert extract_patch(mim, kp(60, 60), 96, 0.0) is not None
        assert extract_patch(mim, kp(60, 60), 96, np.pi / 6) is None

    def test_rotated_sampling_matches_radial_sectors(self):
        size = 301
        c = size // 2
        ys, xs = np.mgrid[0:size, 0:size]
        angle = np.arctan2(ys - c, xs - c) % np.pi
        sectors = (angle / (np.pi / 6)).astype(np.int32) % 6 + 1
        mim = IndexMap(sectors, np.ones_like(angle), 6)
        base = extract_patch(mim, kp(c, c), 96, 0.0)
        rotated = extract_patch(mim, kp(c, c), 96, np.pi / 6)
        predicted = (base.indices % 6) + 1  # sector labels advance one step
        assert np.mean(rotated.indices == predicted) >= 0.90

    def test_subpixel_keypoint_general_path(self, rng):
        mim = random_index_map(rng)
        patch = extract_patch(mim, Keypoint(150.3, 140.2, 1.0, "corner"),
                              96, np.pi / 3)
        assert patch is not None and patch.shape == (96, 96)

    def test_integer_and_general_paths_agree(self, rng):
        mim = random_index_map(rng)
        fast = extract_patch(mim, kp(150, 140), 96, np.pi / 6)
        slow = extract_patch(mim, Keypoint(150.0 + 1e-12, 140.0, 1.0, "corner"),
                             96, np.pi / 6)
        assert np.array_equal(fast.indices, slow.indices)


class TestEncode:
    def test_constant_index_patch(self):
        mim = IndexMap(np.full((96, 96), 3, dtype=np.int32), np.ones((96, 96)), 6)
        vec = encode(mim)
        assert vec.shape == (216,)
        nonzero = np.flatnonzero(vec)
        # one bin per cell, all equal, unit L2 norm over 36 entries
        assert len(nonzero) == 36
        assert np.allclose(vec[nonzero], 1.0 / 6.0)
        assert np.all(nonzero % 6 == 2)  # bin for index 3 in every cell

    def test_vector_length(self, rng):
        mim = random_index_map(rng, 96, 96)
        assert encode(mim).shape == (6 * 6 * 6,)

    def test_unit_norm(self, rng):
        mim = random_index_map(rng, 96, 96)
        assert abs(np.linalg.norm(encode(mim)) - 1.0) <= 1e-6

    def test_cyclic_shift_permutes_bins_within_cells(self, rng):
        mim = random_index_map(rng, 96, 96)
        base = encode(mim).reshape(36, 6)
        for omega in range(1, 7):
            shifted = encode(cyclic_shift(mim, omega)).reshape(36, 6)
            assert np.array_equal(shifted, np.roll(base, -(omega - 1), axis=1))

    def test_indivisible_patch_rejected(self, rng):
        with pytest.raises(ParameterError):
            encode(random_index_map(rng, 95, 95))

    def test_weighted_zero_amplitude_degenerates(self):
        mim = IndexMap(np.full((96, 96), 2, dtype=np.int32),
                       np.zeros((96, 96)), 6)
        assert encode(mim, weighted=True) is None


@pytest.fixture(scope="module")
def scene(label_fields, label_keypoints):
    _, mim = label_fields
    return mim, label_keypoints


class TestDescribeModes:

    def test_ring_count_law(self, scene):
        mim, kps = scene
        result = describe_ring(mim, kps)
        assert len(result) == 6 * len(kps)
        assert result.skipped == 0

    def test_rift2_count_law(self, scene):
        mim, kps = scene
        result = describe_rift2(mim, kps, rotate_patch=False)
        assert len(kps) <= len(result) <= 2 * len(kps)

    def test_ring_layer_one_equals_plain(self, scene):
        mim, kps = scene
        ring = describe_ring(mim, kps)
        plain = describe_plain(mim, kps)
        ring_first = {d.keypoint_id: d.vector for d in ring if d.variant == 1}
        for d in plain:
            assert np.array_equal(d.vector, ring_first[d.keypoint_id])

    def test_ring_descriptors_are_cellwise_permutations(self, scene):
        mim, kps = scene
        ring = describe_ring(mim, kps[:5])
        by_kp = {}
        for d in ring:
            by_kp.setdefault(d.keypoint_id, {})[d.variant] = d.vector
        for variants in by_kp.values():
            base = variants[1].reshape(36, 6)
            for omega, vec in variants.items():
                assert np.array_equal(vec.reshape(36, 6),
                                      np.roll(base, -(omega - 1), axis=1))

    def test_rift2_matches_ring_oracle_without_rotation(self, scene):
        mim, kps = scene
        rift2_set = describe_rift2(mim, kps, rotate_patch=False)
        ring_set = describe_ring(mim, kps)
        ring_by = {(d.keypoint_id, d.variant): d.vector for d in ring_set}
        assert len(rift2_set) > 0
        for d in rift2_set:
            assert np.array_equal(d.vector, ring_by[(d.keypoint_id, d.variant)])

    def test_unique_dominant_yields_one_descriptor(self):
        indices = np.full((200, 200), 4, dtype=np.int32)
        mim = IndexMap(indices, np.ones((200, 200)), 6)
        result = describe_rift2(mim, [kp(100, 100)])
        assert len(result) == 1
        assert result.descriptors[0].variant == 4

    def test_dual_dominant_yields_two_descriptors(self):
        indices = np.full((200, 200), 2, dtype=np.int32)
        indices[:, ::2] = 5  # two equally-common values
        mim = IndexMap(indices, np.ones((200, 200)), 6)
        result = describe_rift2(mim, [kp(100, 100)], rotate_patch=False)
        assert len(result) == 2
        assert sorted(d.variant for d in result.descriptors) == [2, 5]

    def test_all_modes_unit_norm(self, scene):
        mim, kps = scene
        for result in (describe_rift2(mim, kps[:50]), describe_ring(mim, kps[:50]),
                       describe_plain(mim, kps[:50])):
            for d in result:
                assert abs(np.linalg.norm(d.vector) - 1.0) <= 1e-6

    def test_border_keypoint_skipped(self, rng):
        mim = random_index_map(rng, 200, 200)
        result = describe_ring(mim, [kp(10, 10)])
        assert len(result) == 0
        assert result.skipped == 1

    def test_keypoint_ids_reference_input_order(self, scene):
        mim, kps = scene
        result = describe_plain(mim, kps[:10])
        assert [d.keypoint_id for d in result] == list(range(10))


class TestBinaryContainer:
    def test_round_trip(self, tmp_path, rng):
        descs = []
        for i in range(7):
            vec = rng.random(216)
            vec /= np.linalg.norm(vec)
            descs.append(Descriptor(vec, i, (i % 6) + 1,
                                    ("plain", "ring", "rift2")[i % 3]))
        path = tmp_path / "d.rif2"
        write_descriptors(path, descs)
        back = read_descriptors(path)
        assert len(back) == 7
        for a, b in zip(descs, back):
            assert (a.keypoint_id, a.variant, a.mode) == (b.keypoint_id, b.variant, b.mode)
            assert np.allclose(a.vector, b.vector, atol=1e-7)  # float32 storage

    def test_header_layout(self, tmp_path):
        path = tmp_path / "d.rif2"
        write_descriptors(path, [])
        raw = path.read_bytes()
        assert raw[:4] == b"RIF2"
        assert raw[4] == 1          # version
        assert raw[5] == 6          # n_orient
        assert raw[6] == 6          # grid
        assert len(raw) == 11

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "d.rif2"
        path.write_bytes(b"NOPE" + bytes(7))
        with pytest.raises(FormatError):
            read_descriptors(path)

    def test_truncated_record(self, tmp_path, rng):
        path = tmp_path / "d.rif2"
        vec = rng.random(216)
        write_descriptors(path, [Descriptor(vec, 0, 1, "plain")])
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError):
            read_descriptors(path)
