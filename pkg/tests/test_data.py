import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from malformed import corpus
from mifi import DataError, FormatError, InvalidInputError, ShapeError
from mifi.data import (
    SplitSpec,
    SynthConfig,
    ambiguity_groups,
    decode_tensor,
    encode_tensor,
    generate_synthetic,
    keyframe_select,
    load_dataset,
    load_features,
    save_dataset,
    save_features,
    single_view_bayes_bound,
    split_by_driver,
)
from mifi.data.keyframes import frame_difference_totals
from mifi.data.synth import class_prototypes

# -- container ---------------------------------------------------------------


def test_full_size_file_length(tmp_path):
    x = np.random.default_rng(0).normal(size=(1024, 4, 7, 7)).astype(np.float32)
    path = tmp_path / "f.mifi"
    save_features(x, path)
    assert path.stat().st_size == 24 + 802816
    np.testing.assert_array_equal(load_features(path), x)


def test_header_layout():
    buf = encode_tensor(np.zeros((2, 3), dtype=np.float32))
    assert buf[:4] == b"MIFI" and buf[4] == 1 and buf[5] == 2 and buf[6:8] == b"\0\0"
    assert int.from_bytes(buf[8:12], "little") == 2 and int.from_bytes(buf[12:16], "little") == 3


@settings(max_examples=50)
@given(arrays(np.float32, array_shapes(min_dims=1, max_dims=5, max_side=6)))
def test_round_trip_is_bit_exact(x):
    y = decode_tensor(encode_tensor(x))
    assert y.shape == x.shape
    assert y.tobytes() == np.ascontiguousarray(x).tobytes()


def test_special_values_survive():
    x = np.array([0.0, -0.0, np.inf, -np.inf, np.nan, 1e-45], dtype=np.float32)
    assert decode_tensor(encode_tensor(x)).tobytes() == x.tobytes()


@pytest.mark.parametrize("name", sorted(corpus()))
def test_malformed_corpus(name):
    data, offset = corpus()[name]
    with pytest.raises(FormatError) as info:
        decode_tensor(data)
    assert info.value.offset == offset
    assert info.value.exit_code == 3
    assert f"offset {offset}" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_features(tmp_path / "absent.mifi")


# -- synthetic data and manifests -------------------------------------------

SMALL = dict(n_classes=4, n_drivers=5, dims=(3, 2, 2, 2))


def test_synthetic_shapes_and_balance():
    ds = generate_synthetic(SynthConfig(**SMALL, clips_per_driver_per_class=2))
    assert len(ds) == 40
    assert ds.clip_shape == (3, 2, 2, 2)
    assert np.bincount(ds.labels).tolist() == [10] * 4
    assert ds.views[1].dtype == np.float32


def test_synthetic_is_seeded():
    a = generate_synthetic(SynthConfig(**SMALL, seed=5))
    b = generate_synthetic(SynthConfig(**SMALL, seed=5))
    c = generate_synthetic(SynthConfig(**SMALL, seed=6))
    assert a.views[1].tobytes() == b.views[1].tobytes()
    assert a.views[1].tobytes() != c.views[1].tobytes()


def test_ambiguous_prototypes_are_identical_per_camera():
    cfg = SynthConfig(**SMALL, view_ambiguity={1: [(0, 1)], 2: [(1, 2)]})
    protos = class_prototypes(cfg)
    np.testing.assert_array_equal(protos[1][0], protos[1][1])
    assert not np.array_equal(protos[2][0], protos[2][1])
    np.testing.assert_array_equal(protos[2][1], protos[2][2])


def test_noise_free_clips_equal_prototypes():
    cfg = SynthConfig(**SMALL, noise_std=0.0)
    ds = generate_synthetic(cfg)
    protos = class_prototypes(cfg)
    for i in range(len(ds)):
        np.testing.assert_allclose(ds.views[2][i], protos[2][ds.labels[i]], atol=1e-6)


def test_hard_classes_are_closer_together():
    base = class_prototypes(SynthConfig(**SMALL))[1]
    hard = class_prototypes(SynthConfig(**SMALL, hard_classes=(0, 1), hard_margin=0.25))[1]
    assert np.linalg.norm(hard[0] - hard[1]) == pytest.approx(0.25 * np.linalg.norm(base[0] - base[1]), rel=1e-6)
    np.testing.assert_array_equal(hard[2], base[2])


def test_invalid_ambiguity_pair_named():
    with pytest.raises(InvalidInputError, match=r"\(0, 16\)"):
        SynthConfig(view_ambiguity={1: [(0, 16)]})


def test_bayes_bound_counts_groups():
    cfg = SynthConfig(view_ambiguity={1: [(2 * i, 2 * i + 1) for i in range(8)], 2: [(0, 1), (1, 2)]})
    assert single_view_bayes_bound(cfg, 1) == 0.5
    assert single_view_bayes_bound(cfg, 2) == 14 / 16
    assert ambiguity_groups(4, [(0, 1), (1, 2)]) == [[0, 1, 2], [3]]


def test_manifest_round_trip(tmp_path):
    ds = generate_synthetic(SynthConfig(**SMALL))
    save_dataset(ds, tmp_path)
    back = load_dataset(tmp_path, n_classes=4)
    assert back.ids == ds.ids
    np.testing.assert_array_equal(back.labels, ds.labels)
    np.testing.assert_array_equal(back.drivers, ds.drivers)
    for v in (1, 2):
        assert back.views[v].tobytes() == ds.views[v].tobytes()


def test_manifest_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(tmp_path)
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(DataError):
        load_dataset(tmp_path)


def test_dataset_rejects_label_out_of_range():
    ds = generate_synthetic(SynthConfig(**SMALL))
    with pytest.raises(InvalidInputError):
        type(ds)(ds.ids, ds.labels + 4, ds.drivers, ds.views, n_classes=4)
    with pytest.raises(ShapeError):
        type(ds)(ds.ids, ds.labels, ds.drivers, {1: ds.views[1], 2: ds.views[2][:, :2]}, n_classes=4)


# -- driver split -------------------------------------------------------------


def test_split_keeps_drivers_whole():
    ds = split_by_driver(generate_synthetic(SynthConfig(n_classes=2, n_drivers=50, dims=(1, 1, 1, 1))), SplitSpec())
    seen = {}
    for d, s in zip(ds.drivers, ds.splits):
        assert seen.setdefault(d, s) == s
    counts = {s: len({d for d, t in seen.items() if t == s}) for s in ("train", "val", "test")}
    assert counts == {"train": 35, "val": 5, "test": 10}


def test_split_is_seeded():
    base = generate_synthetic(SynthConfig(n_classes=2, n_drivers=50, dims=(1, 1, 1, 1)))
    a = split_by_driver(base, SplitSpec(seed=1)).splits
    b = split_by_driver(base, SplitSpec(seed=1)).splits
    c = split_by_driver(base, SplitSpec(seed=2)).splits
    assert list(a) == list(b) and list(a) != list(c)


def test_split_counts_must_match():
    base = generate_synthetic(SynthConfig(**SMALL))
    with pytest.raises(InvalidInputError):
        split_by_driver(base, SplitSpec(3, 1, 2))


# -- keyframes --------------------------------------------------------------


def brute_force_keyframes(frames, n):
    """Exhaustive pairwise differences over the temporal axis; best subset of size n."""
    T = frames.shape[1]
    d = np.zeros((T, T))
    for i in range(T):
        for j in range(T):
            d[i, j] = np.abs(frames[:, i].astype(np.float64) - frames[:, j]).sum()
    score = d.sum(axis=1)
    best = None
    for subset in itertools.combinations(range(T), n):
        key = (sorted((-score[i], i) for i in subset))
        if best is None or key < best[0]:
            best = (key, subset)
    return frames[:, list(best[1])]


def test_keyframes_match_brute_force():
    r = np.random.default_rng(11)
    for _ in range(50):
        T = int(r.integers(1, 9))
        n = int(r.integers(1, T + 1))
        frames = r.normal(size=(2, T, 2, 2)).astype(np.float32)
        np.testing.assert_array_equal(keyframe_select(frames, n), brute_force_keyframes(frames, n))


def test_keyframes_hand_case():
    frames = np.array([0.0, 0.0, 10.0, 0.0, 5.0]).reshape(1, 5, 1, 1)
    # totals: 15, 15, 35, 15, 20 -> keep frames 2 and 4
    np.testing.assert_array_equal(frame_difference_totals(frames), [15, 15, 35, 15, 20])
    np.testing.assert_array_equal(keyframe_select(frames, 2).ravel(), [10.0, 5.0])


def test_keyframes_ties_prefer_earlier_frames():
    frames = np.zeros((1, 4, 1, 1))
    np.testing.assert_array_equal(keyframe_select(frames, 2), frames[:, :2])


def test_keyframes_full_selection_is_identity():
    frames = np.random.default_rng(0).normal(size=(3, 6, 2, 2))
    np.testing.assert_array_equal(keyframe_select(frames, 6), frames)


@pytest.mark.parametrize("n", [0, 7])
def test_keyframes_n_out_of_range(n):
    with pytest.raises(InvalidInputError):
        keyframe_select(np.zeros((1, 6, 1, 1)), n)
