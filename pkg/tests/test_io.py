import numpy as np
import pytest

from racos.errors import InvalidInput
from racos.io import (
    read_dense_csv,
    read_masked_csv,
    read_meta_json,
    write_dense_csv,
    write_masked_csv,
    write_meta_json,
)
from racos.linalg import MaskedMatrix, ObservationMask


class TestDenseCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(7, 5))
        path = tmp_path / "m.csv"
        write_dense_csv(path, m)
        assert np.array_equal(read_dense_csv(path), m)

    def test_malformed_token_diagnosed(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0,2.0\n3.0,oops\n")
        with pytest.raises(InvalidInput, match=r"row 1, column 1"):
            read_dense_csv(path)

    def test_ragged_rows_diagnosed(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(InvalidInput, match=r"row 1"):
            read_dense_csv(path)

    def test_nan_rejected_in_dense(self, tmp_path):
        path = tmp_path / "nan.csv"
        path.write_text("1.0,NaN\n2.0,3.0\n")
        with pytest.raises(InvalidInput, match=r"row 0, column 1"):
            read_dense_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInput):
            read_dense_csv(tmp_path / "absent.csv")


class TestMaskedCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        obs = rng.random((6, 8)) < 0.6
        vals = np.where(obs, rng.normal(size=(6, 8)), 0.0)
        masked = MaskedMatrix(values=vals, mask=ObservationMask(obs))
        path = tmp_path / "masked.csv"
        write_masked_csv(path, masked)
        back = read_masked_csv(path)
        assert np.array_equal(back.mask.observed, obs)
        assert np.array_equal(back.values, vals)

    def test_nan_token_case_insensitive(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("1.0,nan\nNAN,2.0\n")
        back = read_masked_csv(path)
        assert back.mask.count == 2
        assert back.values[0, 0] == 1.0 and back.values[1, 1] == 2.0


class TestMetaSidecar:
    def test_sidecar_round_trip(self, tmp_path):
        path = tmp_path / "m.csv"
        write_dense_csv(path, np.eye(2))
        write_meta_json(path, {"rows": 2, "cols": 2, "source": "unit-test"})
        assert (tmp_path / "m.meta.json").exists()
        assert read_meta_json(path)["rows"] == 2

    def test_absent_sidecar_is_none(self, tmp_path):
        path = tmp_path / "m.csv"
        write_dense_csv(path, np.eye(2))
        assert read_meta_json(path) is None
