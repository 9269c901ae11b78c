import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from uavlab.channel import ChannelParams, UavPose
from uavlab.dataset import (GridConfig, SampleSet, build_samples, featurize, load_dataset,
                            normalize_features, save_dataset, split, split_session_ids)
from uavlab.errors import FormatError, ValidationError
from uavlab.mobility import Snapshot, generate_session
from uavlab.oracle import PlacementResult, label_session

GRID = GridConfig()
AREA = (2000.0, 2000.0)


def window_of(positions, sid=0, t0=0):
    return [Snapshot(t0 + k, np.asarray(p, float), sid) for k, p in enumerate(positions)]


def fake_labels(sessions):
    return {s.id: [PlacementResult(UavPose(100.0 * t, 7.0 * s.id, 50.0), 0, 0) for t in range(15)]
                   for s in sessions}


def test_all_users_in_one_point():
    pts = np.full((30, 2), 555.0)
    x = featurize(window_of([pts] * 5))
    assert x.shape == (20, 20, 5)
    assert np.all(x[5, 5, :] == 30)
    assert x.sum() == 150


def test_top_right_corner_goes_to_last_cell():
    x = featurize(window_of([np.array([[2000.0, 2000.0]])] * 5))
    assert np.all(x[19, 19, :] == 1)


def test_row_is_y_col_is_x():
    x = featurize(window_of([np.array([[150.0, 1950.0]])] * 5))
    assert x[19, 1, 0] == 1


def test_featurize_rejects_bad_windows():
    pts = np.zeros((3, 2))
    with pytest.raises(ValidationError):
        featurize(window_of([pts] * 4))
    bad = window_of([pts] * 5)
    bad[2] = Snapshot(7, pts, 0)
    with pytest.raises(ValidationError):
        featurize(bad)
    mixed = window_of([pts] * 5)
    mixed[3] = Snapshot(3, pts, 1)
    with pytest.raises(ValidationError):
        featurize(mixed)


coords = arrays(np.float64, st.tuples(st.integers(1, 40), st.just(2)),
                elements=st.floats(0, 2000, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(coords, st.randoms(use_true_random=False))
def test_conservation_and_permutation_invariance(pts, rnd):
    w = window_of([pts] * 5)
    x = featurize(w)
    assert x.shape == (20, 20, 5)
    assert np.all(x.sum(axis=(0, 1)) == len(pts))
    perm = list(range(len(pts)))
    rnd.shuffle(perm)
    assert np.array_equal(featurize(window_of([pts[perm]] * 5)), x)
    n = normalize_features(x)
    np.testing.assert_allclose(n.sum(axis=(0, 1)), 1.0, rtol=1e-6)


def test_real_sessions_conserve_users():
    s = generate_session(3, 11)
    for t in range(4, 15):
        x = featurize(s.snapshots[t - 4:t + 1])
        assert np.all(x.sum(axis=(0, 1)) == 30)


def test_build_samples_counts_and_labels():
    sessions = [generate_session(i, 40 + i) for i in range(3)]
    data = build_samples(sessions[:1], fake_labels(sessions))
    assert len(data) == 11
    data = build_samples(sessions, fake_labels(sessions))
    assert len(data) == 33
    assert [tuple(m) for m in data.meta[:11]] == [(0, t) for t in range(4, 15)]
    s = data[12]
    assert s.meta == (1, 5)
    np.testing.assert_allclose(s.label, (500.0 / 2000, 7.0 / 2000))
    np.testing.assert_array_equal(s.features, featurize(sessions[1].snapshots[1:6]))
    assert 72000 * 11 == 792000


def test_label_round_trip_to_meters():
    p = ChannelParams()
    s = generate_session(0, 3)
    labels = {0: label_session(s, p)}
    data = build_samples([s], labels)
    for smp in data:
        pose = labels[0][smp.meta[1]].pose
        assert abs(smp.label[0] * 2000 - pose.x) <= 1e-9
        assert abs(smp.label[1] * 2000 - pose.y) <= 1e-9


def test_missing_label_names_instant():
    s = generate_session(5, 1)
    labels = fake_labels([s])
    labels[5] = labels[5][:9]
    with pytest.raises(ValidationError, match="session 5 step 9"):
        build_samples([s], labels)


def test_split_full_scale():
    ids = np.arange(72000)
    tr, va, te = split_session_ids(ids, (0.75, 0.0, 0.25), seed=1)
    assert (len(tr), len(va), len(te)) == (54000, 0, 18000)
    assert len(np.union1d(tr, te)) == 72000


def test_split_deterministic_and_disjoint():
    sessions = [generate_session(i, i) for i in range(20)]
    data = build_samples(sessions, fake_labels(sessions))
    a = split(data, (0.6, 0.2, 0.2), seed=3)
    b = split(data, (0.6, 0.2, 0.2), seed=3)
    for x, y in zip(a, b):
        assert x == y
    sets = [set(p.session_ids) for p in a]
    assert not (sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2])
    assert sum(len(p) for p in a) == len(data)
    assert all(len(p) % 11 == 0 for p in a)


def test_split_errors():
    with pytest.raises(ValidationError):
        split_session_ids(range(10), (0.5, 0.2, 0.2), 0)
    with pytest.raises(ValidationError):
        split_session_ids(range(2), (0.4, 0.3, 0.3), 0)


def test_save_load_round_trip(tmp_path):
    sessions = [generate_session(i, 9 + i) for i in range(4)]
    data = build_samples(sessions, fake_labels(sessions))
    path = tmp_path / "d.bin"
    save_dataset(data, path)
    assert path.read_bytes()[:6] == b"UAVDS1"
    assert load_dataset(path) == data
    empty = tmp_path / "e.bin"
    save_dataset(SampleSet.empty(), empty)
    assert len(load_dataset(empty)) == 0


def test_corruption_detected(tmp_path):
    sessions = [generate_session(0, 9)]
    path = tmp_path / "d.bin"
    save_dataset(build_samples(sessions, fake_labels(sessions)), path)
    blob = bytearray(path.read_bytes())
    for pos in (10, 30, len(blob) // 2, len(blob) - 5):
        bad = bytearray(blob)
        bad[pos] ^= 0x40
        path.write_bytes(bad)
        with pytest.raises(FormatError):
            load_dataset(path)
    path.write_bytes(blob[:-100])
    with pytest.raises(FormatError):
        load_dataset(path)
    path.write_bytes(b"XXXXXX" + blob[6:])
    with pytest.raises(FormatError):
        load_dataset(path)
    path.write_bytes(b"")
    with pytest.raises(FormatError):
        load_dataset(path)
