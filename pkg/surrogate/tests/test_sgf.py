"""Tests for the SGF1 interchange reader/writer against real files produced
by the primary toolchain's CLI."""

import numpy as np
import pytest

from stressgan import sgf


class TestLoadDataset:
    def test_shapes_and_channels(self, coarse_dataset):
        m, ids, inputs, targets = sgf.load_dataset(coarse_dataset)
        assert m == 32
        assert inputs.shape == (48, 3, 32, 32)
        assert targets.shape == (48, 1, 32, 32)
        assert ids.tolist() == list(range(48))

    def test_geom_codes_legal(self, coarse_dataset):
        _, _, inputs, _ = sgf.load_dataset(coarse_dataset)
        codes = np.unique(inputs[:, 0])
        assert set(codes.tolist()) <= {0.0, 1.0, 2.0, 3.0, 4.0}

    def test_targets_nonnegative_and_masked(self, coarse_dataset):
        _, _, inputs, targets = sgf.load_dataset(coarse_dataset)
        assert targets.min() >= 0.0
        void = inputs[:, 0] == 0.0
        assert not targets[:, 0][void].any()

    def test_split_selection(self, coarse_dataset):
        m, ids_train, _, _ = sgf.load_dataset(coarse_dataset, "entire", "train")
        m, ids_test, _, _ = sgf.load_dataset(coarse_dataset, "entire", "test")
        assert len(ids_train) == 38 and len(ids_test) == 10
        assert not set(ids_train.tolist()) & set(ids_test.tolist())

    def test_unknown_split_rejected(self, coarse_dataset):
        with pytest.raises(sgf.FormatError):
            sgf.load_dataset(coarse_dataset, "nope", "train")


class TestPredictionWriter:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        fields = rng.normal(size=(5, 16, 16)).astype(np.float32)
        ids = np.array([3, 1, 4, 1, 5])  # ids need not be sorted or unique here
        path = tmp_path / "pred.sgf1"
        sgf.write_predictions(path, 16, ids, fields)
        m, channels, read_ids, planes = sgf.read_records(path)
        assert (m, channels) == (16, 1)
        assert read_ids.tolist() == ids.tolist()
        assert np.array_equal(planes[:, 0], fields)

    def test_corruption_detected(self, tmp_path):
        path = tmp_path / "pred.sgf1"
        sgf.write_predictions(path, 8, np.arange(3), np.zeros((3, 8, 8), np.float32))
        raw = bytearray(path.read_bytes())
        raw[40] ^= 0x01
        path.write_bytes(bytes(raw))
        with pytest.raises(sgf.FormatError):
            sgf.read_records(path)

    def test_bad_shape_rejected(self, tmp_path):
        with pytest.raises(sgf.FormatError):
            sgf.write_predictions(tmp_path / "x.sgf1", 8, np.arange(2),
                                  np.zeros((2, 4, 4), np.float32))
