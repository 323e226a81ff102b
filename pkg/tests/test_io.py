import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birs import io as bio
from birs.dbirs import BlockResult
from birs.errors import CorruptPayload, ParseError, VersionMismatch
from birs.null_model import Family, fit_null
from birs.regions import Region
from birs.scores import ScoreSet


class TestMatrixRoundTrip:
    def test_exact_round_trip_with_metadata(self, tmp_path):
        rng = np.random.default_rng(0)
        values = rng.standard_normal((7, 5))
        positions = np.arange(5) * 100
        maf = rng.uniform(0.01, 0.5, 5)
        path = tmp_path / "m.tsv"
        bio.write_matrix(
            path, values, ["a", "b", "c", "d", "e"],
            positions=positions, maf=maf, config={"seed": 3},
        )
        back = bio.read_matrix(path)
        np.testing.assert_array_equal(back.values, values)
        np.testing.assert_array_equal(back.positions, positions)
        np.testing.assert_array_equal(back.maf, maf)
        assert back.column_ids == ["a", "b", "c", "d", "e"]
        assert back.config == {"seed": 3}

    @settings(max_examples=25, deadline=None)
    @given(
        data=st.lists(
            st.lists(
                st.floats(allow_nan=False, allow_infinity=False, width=64),
                min_size=3, max_size=3,
            ),
            min_size=1, max_size=6,
        )
    )
    def test_round_trip_any_finite_doubles(self, data, tmp_path_factory):
        path = tmp_path_factory.mktemp("mat") / "m.tsv"
        values = np.array(data)
        bio.write_matrix(path, values)
        back = bio.read_matrix(path)
        np.testing.assert_array_equal(back.values, values)

    def test_truncated_file_names_bad_line(self, tmp_path):
        path = tmp_path / "m.tsv"
        bio.write_matrix(path, np.ones((4, 2)))
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(ParseError) as err:
            bio.read_matrix(path)
        assert "line" in str(err.value)

    def test_short_row_rejected(self, tmp_path):
        path = tmp_path / "m.tsv"
        bio.write_matrix(path, np.ones((2, 5)))
        txt = path.read_text().splitlines()
        txt[-1] = "\t".join(["1.0"] * 4)
        path.write_text("\n".join(txt) + "\n")
        with pytest.raises(ParseError) as err:
            bio.read_matrix(path)
        assert "line 6" in str(err.value)  # header is 4 lines, bad row is the 2nd

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("#something-else\n")
        with pytest.raises(ParseError):
            bio.read_matrix(path)


class TestRegionsRoundTrip:
    def test_round_trip(self, tmp_path):
        records = bio.region_records(
            [Region(2, 5), Region(9, 12)], [3.5, 2.25], [1.5, 1.0],
            np.arange(20) * 100,
        )
        path = tmp_path / "r.tsv"
        bio.write_regions(path, records, config={"alpha": 0.05})
        back, config = bio.read_regions(path)
        assert config == {"alpha": 0.05}
        assert [r.region for r in back] == [Region(2, 5), Region(9, 12)]
        assert [r.stat for r in back] == [3.5, 2.25]
        assert [r.threshold for r in back] == [1.5, 1.0]
        assert back[0].start_bp == 200 and back[0].end_bp == 400

    def test_unsorted_rejected(self, tmp_path):
        path = tmp_path / "r.tsv"
        positions = np.arange(20) * 100
        records = bio.region_records(
            [Region(9, 12), Region(2, 5)], [1.0, 1.0], [0.5, 0.5], positions
        )
        bio.write_regions(path, records)
        with pytest.raises(ParseError):
            bio.read_regions(path)

    def test_empty_region_list(self, tmp_path):
        path = tmp_path / "r.tsv"
        bio.write_regions(path, [], config={"mode": "sbirs"})
        back, config = bio.read_regions(path)
        assert back == [] and config["mode"] == "sbirs"


class TestSumstats:
    def make_scores(self):
        rng = np.random.default_rng(1)
        return ScoreSet(
            u=rng.standard_normal(12),
            boot=rng.standard_normal((100, 12)),
            n_boot=100,
            seed=77,
        )

    def test_round_trip(self, tmp_path):
        scores = self.make_scores()
        positions = np.arange(12) * 50
        maf = np.linspace(0.05, 0.4, 12)
        path = tmp_path / "s.tsv"
        bio.write_sumstats(path, scores, positions, maf, "abc123")
        back, pos2, maf2, digest = bio.read_sumstats(path)
        np.testing.assert_array_equal(back.u, scores.u)
        np.testing.assert_array_equal(back.boot, scores.boot)
        assert back.seed == 77 and back.n_boot == 100
        np.testing.assert_array_equal(pos2, positions)
        np.testing.assert_array_equal(maf2, maf)
        assert digest == "abc123"

    def test_companion_mismatch_rejected(self, tmp_path):
        scores = self.make_scores()
        path = tmp_path / "s.tsv"
        bio.write_sumstats(path, scores, np.arange(12), np.full(12, 0.1), "x")
        # Overwrite the companion with a different seed.
        np.savez(
            bio.boot_companion_path(path),
            boot=scores.boot, seed=np.int64(999), n_boot=np.int64(100),
        )
        with pytest.raises(ParseError):
            bio.read_sumstats(path)

    def test_missing_companion_rejected(self, tmp_path):
        scores = self.make_scores()
        path = tmp_path / "s.tsv"
        bio.write_sumstats(path, scores, np.arange(12), np.full(12, 0.1), "x")
        bio.boot_companion_path(path)
        import os

        os.remove(bio.boot_companion_path(path))
        with pytest.raises(ParseError) as err:
            bio.read_sumstats(path)
        assert "boot" in str(err.value)

    def test_model_hash_distinguishes_fits(self):
        rng = np.random.default_rng(2)
        x = np.column_stack([np.ones(30), rng.standard_normal(30)])
        y = rng.standard_normal(30)
        a = fit_null(y, x, Family.GAUSSIAN_IDENTITY)
        b = fit_null(y + 0.5, x, Family.GAUSSIAN_IDENTITY)
        assert bio.model_hash(a) != bio.model_hash(b)
        assert bio.model_hash(a) == bio.model_hash(a)


def sample_block():
    rng = np.random.default_rng(3)
    return BlockResult(
        block_id=4,
        block_region=Region(64, 96),
        detected=[Region(70, 74), Region(80, 88)],
        detected_stats=[5.5, 3.25],
        detected_thresholds=[1.5, 1.25],
        block_stat=5.5,
        m_vec=rng.standard_normal(50),
        l_vec=rng.standard_normal(50) * 0.5,
        n_boot=50,
        seed=123,
    )


class TestBlockResultWire:
    def test_round_trip(self):
        block = sample_block()
        back = bio.deserialize_block_result(bio.serialize_block_result(block))
        assert back.block_id == block.block_id
        assert back.block_region == block.block_region
        assert back.detected == block.detected
        assert back.detected_stats == block.detected_stats
        assert back.detected_thresholds == block.detected_thresholds
        assert back.block_stat == block.block_stat
        np.testing.assert_array_equal(back.m_vec, block.m_vec)
        np.testing.assert_array_equal(back.l_vec, block.l_vec)
        assert back.n_boot == block.n_boot and back.seed == block.seed

    def test_flipped_byte_detected(self):
        raw = bytearray(bio.serialize_block_result(sample_block()))
        raw[len(raw) // 2] ^= 0xFF
        with pytest.raises(CorruptPayload):
            bio.deserialize_block_result(bytes(raw))

    def test_truncation_detected(self):
        raw = bio.serialize_block_result(sample_block())
        with pytest.raises(CorruptPayload):
            bio.deserialize_block_result(raw[: len(raw) - 9])

    def test_bad_magic_detected(self):
        raw = bio.serialize_block_result(sample_block())
        with pytest.raises(CorruptPayload):
            bio.deserialize_block_result(b"XXXX" + raw[4:])

    def test_future_version_rejected(self):
        raw = bio.serialize_block_result(sample_block())
        body = bytearray(raw[4:-4])
        struct.pack_into("<I", body, 0, 2)  # bump the version tag
        fixed = bio.BLOCK_MAGIC + bytes(body) + struct.pack("<I", zlib.crc32(bytes(body)))
        with pytest.raises(VersionMismatch):
            bio.deserialize_block_result(fixed)
