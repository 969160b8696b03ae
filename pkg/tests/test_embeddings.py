"""Embedding tables: synthesis determinism and the text file format."""

import numpy as np
import pytest

from numbra.embeddings import (
    DIGITS,
    SYNTH_TOKENS,
    EmbeddingTable,
    load_table,
    save_table,
    synth_table,
)
from numbra.errors import DomainError, FormatError, MissingTokenError


class TestSynthTable:
    def test_covers_digits_and_specials(self):
        table = synth_table(dim=4, seed=0)
        assert set(table.tokens) == set(SYNTH_TOKENS)
        assert len(table) == 14

    def test_same_seed_bit_identical(self):
        a = synth_table(dim=8, seed=7)
        b = synth_table(dim=8, seed=7)
        for token in a.tokens:
            assert np.array_equal(a.vector(token), b.vector(token))

    def test_different_seed_differs(self):
        a = synth_table(dim=8, seed=0)
        b = synth_table(dim=8, seed=1)
        assert not np.array_equal(a.vector("0"), b.vector("0"))

    def test_unit_norm(self):
        table = synth_table(dim=16, seed=3)
        for token in table.tokens:
            assert np.linalg.norm(table.vector(token)) == pytest.approx(1.0, abs=1e-12)

    def test_dim_below_two_rejected(self):
        with pytest.raises(DomainError):
            synth_table(dim=1, seed=0)

    def test_negative_seed_rejected(self):
        with pytest.raises(DomainError):
            synth_table(dim=4, seed=-1)


class TestEmbeddingTable:
    def test_missing_token_error(self, table8):
        with pytest.raises(MissingTokenError) as err:
            table8.vector("x")
        assert "x" in str(err.value)

    def test_mixed_dims_rejected(self):
        with pytest.raises(DomainError):
            EmbeddingTable({"a": np.zeros(3), "b": np.zeros(4)})

    def test_empty_table_rejected(self):
        with pytest.raises(DomainError):
            EmbeddingTable({})

    def test_digit_matrix_rows_follow_digit_order(self, table8):
        matrix = table8.digit_matrix()
        assert matrix.shape == (10, 8)
        assert matrix.flags["C_CONTIGUOUS"]
        for i, d in enumerate(DIGITS):
            assert np.array_equal(matrix[i], table8.vector(d))


class TestFileFormat:
    def test_save_load_round_trip_exact(self, tmp_path, table16):
        path = str(tmp_path / "t.vec")
        save_table(table16, path)
        loaded = load_table(path)
        assert set(loaded.tokens) == set(table16.tokens)
        for token in table16.tokens:
            # 17 significant digits round-trip IEEE doubles exactly
            assert np.array_equal(loaded.vector(token), table16.vector(token))

    def test_header_and_separators(self, tmp_path, table8):
        path = str(tmp_path / "t.vec")
        save_table(table8, path)
        raw = open(path, encoding="utf-8").read()
        lines = raw.splitlines()
        assert lines[0] == "14 8"
        assert "\r" not in raw
        assert all("  " not in line for line in lines)

    def _load_text(self, tmp_path, text):
        path = tmp_path / "bad.vec"
        path.write_text(text, encoding="utf-8")
        return load_table(str(path))

    def test_empty_file_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "")

    def test_bad_header_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "two 3\na 1 2 3\n")

    def test_one_field_header_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "3\na 1 2 3\n")

    def test_row_count_mismatch_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "2 2\na 1 2\n")

    def test_wrong_column_count_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "1 3\na 1 2\n")

    def test_duplicate_token_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "2 1\na 1\na 2\n")

    def test_unparseable_value_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "1 2\na 1 x\n")

    def test_non_finite_value_rejected(self, tmp_path):
        with pytest.raises(FormatError):
            self._load_text(tmp_path, "1 2\na 1 inf\n")

    def test_missing_file_is_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_table(str(tmp_path / "absent.vec"))
