"""File formats: matrices, region lists, summary statistics, and the
block-result wire encoding.

Matrices and regions are tab-separated text with ``#``-prefixed header
lines so runs stay diffable; bootstrap matrices ride along as ``.npz``
companions and block results use a checksummed binary encoding since
they cross process boundaries.  Indices are 0-based half-open
throughout.  Every writer embeds the resolved run configuration so
outputs are self-describing.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from .dbirs import BlockResult
from .errors import CorruptPayload, ParseError, VersionMismatch
from .null_model import NullModel
from .regions import Region
from .scores import GenotypeMatrix, ScoreSet

MATRIX_MAGIC = "#birs-matrix v1"
REGIONS_MAGIC = "#birs-regions v1"
SUMSTATS_MAGIC = "#birs-sumstats v1"
CHROM_PLACEHOLDER = "chr0"

BLOCK_MAGIC = b"BBRS"
BLOCK_VERSION = 1


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# matrices


@dataclass
class MatrixFile:
    values: np.ndarray
    column_ids: list[str]
    positions: np.ndarray | None = None
    maf: np.ndarray | None = None
    config: dict = field(default_factory=dict)

    def to_genotypes(self) -> GenotypeMatrix:
        if self.positions is None or self.maf is None:
            raise ParseError("matrix lacks the position/maf metadata of a genotype file")
        return GenotypeMatrix(
            dosages=self.values, positions=self.positions, maf=self.maf
        )


def write_matrix(
    path: str | os.PathLike,
    values: np.ndarray,
    column_ids: list[str] | None = None,
    positions: np.ndarray | None = None,
    maf: np.ndarray | None = None,
    config: dict | None = None,
) -> None:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("matrix payload must be 2-dimensional")
    n, p = values.shape
    if column_ids is None:
        column_ids = [f"c{j}" for j in range(p)]
    if len(column_ids) != p:
        raise ValueError("one column id per column required")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MATRIX_MAGIC + "\n")
        if config:
            fh.write("#config " + json.dumps(config, sort_keys=True) + "\n")
        fh.write(f"#n {n}\n#p {p}\n")
        fh.write("#columns " + "\t".join(column_ids) + "\n")
        if positions is not None:
            fh.write("#positions " + "\t".join(str(int(v)) for v in positions) + "\n")
        if maf is not None:
            fh.write("#maf " + "\t".join(_fmt(v) for v in maf) + "\n")
        for row in values:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")


def read_matrix(path: str | os.PathLike) -> MatrixFile:
    n = p = None
    column_ids: list[str] | None = None
    positions = maf = None
    config: dict = {}
    rows: list[np.ndarray] = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MATRIX_MAGIC:
        raise ParseError(f"not a matrix file (expected '{MATRIX_MAGIC}')", line=1)
    lineno = 1
    for raw in lines[1:]:
        lineno += 1
        if raw.startswith("#"):
            key, _, rest = raw[1:].partition(" ")
            try:
                if key == "config":
                    config = json.loads(rest)
                elif key == "n":
                    n = int(rest)
                elif key == "p":
                    p = int(rest)
                elif key == "columns":
                    column_ids = rest.split("\t")
                elif key == "positions":
                    positions = np.array(rest.split("\t"), dtype=np.int64)
                elif key == "maf":
                    maf = np.array(rest.split("\t"), dtype=np.float64)
                else:
                    raise ParseError(f"unknown header key '{key}'", line=lineno)
            except (ValueError, json.JSONDecodeError) as exc:
                raise ParseError(f"bad header: {exc}", line=lineno) from exc
            continue
        try:
            row = np.array(raw.split("\t"), dtype=np.float64)
        except ValueError as exc:
            raise ParseError(f"bad data row: {exc}", line=lineno) from exc
        if p is not None and row.shape[0] != p:
            raise ParseError(
                f"expected {p} values per row, found {row.shape[0]}", line=lineno
            )
        rows.append(row)
    if n is None or p is None:
        raise ParseError("missing #n/#p header", line=1)
    if len(rows) != n:
        raise ParseError(
            f"header declares n={n} rows but file has {len(rows)}",
            line=lineno + 1,
        )
    values = np.vstack(rows) if rows else np.empty((0, p))
    for meta, name in ((positions, "positions"), (maf, "maf")):
        if meta is not None and meta.shape[0] != p:
            raise ParseError(f"{name} row length != p")
    return MatrixFile(
        values=values,
        column_ids=column_ids or [f"c{j}" for j in range(p)],
        positions=positions,
        maf=maf,
        config=config,
    )


# ---------------------------------------------------------------------------
# region lists


@dataclass
class RegionRecord:
    region: Region
    start_bp: int
    end_bp: int
    stat: float
    threshold: float
    chrom: str = CHROM_PLACEHOLDER


def region_records(
    regions: list[Region],
    stats: list[float],
    thresholds: list[float],
    positions: np.ndarray | None,
) -> list[RegionRecord]:
    records = []
    for reg, stat, thr in zip(regions, stats, thresholds):
        if positions is not None:
            start_bp = int(positions[reg.start])
            end_bp = int(positions[reg.end - 1])
        else:
            start_bp = end_bp = -1
        records.append(RegionRecord(reg, start_bp, end_bp, stat, thr))
    return records


def write_regions(
    path: str | os.PathLike, records: list[RegionRecord], config: dict | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REGIONS_MAGIC + "\n")
        if config:
            fh.write("#config " + json.dumps(config, sort_keys=True) + "\n")
        fh.write("#columns chrom\tstart_idx\tend_idx\tstart_bp\tend_bp\tstat\tthreshold\n")
        for rec in records:
            fh.write(
                "\t".join(
                    [
                        rec.chrom,
                        str(rec.region.start),
                        str(rec.region.end),
                        str(rec.start_bp),
                        str(rec.end_bp),
                        _fmt(rec.stat),
                        _fmt(rec.threshold),
                    ]
                )
                + "\n"
            )


def read_regions(path: str | os.PathLike) -> tuple[list[RegionRecord], dict]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != REGIONS_MAGIC:
        raise ParseError(f"not a regions file (expected '{REGIONS_MAGIC}')", line=1)
    config: dict = {}
    records: list[RegionRecord] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if raw.startswith("#"):
            if raw.startswith("#config "):
                try:
                    config = json.loads(raw[len("#config ") :])
                except json.JSONDecodeError as exc:
                    raise ParseError(f"bad config header: {exc}", line=lineno) from exc
            continue
        parts = raw.split("\t")
        if len(parts) != 7:
            raise ParseError(f"expected 7 fields, found {len(parts)}", line=lineno)
        try:
            records.append(
                RegionRecord(
                    region=Region(int(parts[1]), int(parts[2])),
                    start_bp=int(parts[3]),
                    end_bp=int(parts[4]),
                    stat=float(parts[5]),
                    threshold=float(parts[6]),
                    chrom=parts[0],
                )
            )
        except ValueError as exc:
            raise ParseError(f"bad region row: {exc}", line=lineno) from exc
    prev_end = None
    for rec in records:
        if prev_end is not None and rec.region.start < prev_end:
            raise ParseError("regions are not sorted and disjoint")
        prev_end = rec.region.end
    return records, config


# ---------------------------------------------------------------------------
# summary statistics


def model_hash(model: NullModel) -> str:
    digest = hashlib.sha256()
    digest.update(model.family.value.encode())
    digest.update(np.ascontiguousarray(model.gamma_hat).tobytes())
    digest.update(struct.pack("<d", model.phi_hat))
    return digest.hexdigest()[:16]


def boot_companion_path(path: str | os.PathLike) -> str:
    base, _ = os.path.splitext(str(path))
    return base + ".boot.npz"


def write_sumstats(
    path: str | os.PathLike,
    scores: ScoreSet,
    positions: np.ndarray,
    maf: np.ndarray,
    model_digest: str,
    config: dict | None = None,
) -> None:
    """Write per-variant scores as text plus the bootstrap matrix as a
    binary companion keyed by (seed, n_boot)."""
    boot_path = boot_companion_path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(SUMSTATS_MAGIC + "\n")
        if config:
            fh.write("#config " + json.dumps(config, sort_keys=True) + "\n")
        fh.write(f"#seed {scores.seed}\n")
        fh.write(f"#n-boot {scores.n_boot}\n")
        fh.write(f"#model-hash {model_digest}\n")
        fh.write(f"#boot-file {os.path.basename(boot_path)}\n")
        fh.write("#columns index\tposition\tmaf\tscore\n")
        for j in range(scores.n_variants):
            fh.write(
                f"{j}\t{int(positions[j])}\t{_fmt(maf[j])}\t{_fmt(scores.u[j])}\n"
            )
    np.savez(
        boot_path,
        boot=scores.boot,
        seed=np.int64(scores.seed),
        n_boot=np.int64(scores.n_boot),
    )


def read_sumstats(
    path: str | os.PathLike,
) -> tuple[ScoreSet, np.ndarray, np.ndarray, str]:
    """Read a sumstats file; returns (scores, positions, maf, model hash)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SUMSTATS_MAGIC:
        raise ParseError(f"not a sumstats file (expected '{SUMSTATS_MAGIC}')", line=1)
    seed = n_boot = None
    digest = ""
    boot_file = None
    idx: list[int] = []
    positions: list[int] = []
    maf: list[float] = []
    u: list[float] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if raw.startswith("#"):
            key, _, rest = raw[1:].partition(" ")
            if key == "seed":
                seed = int(rest)
            elif key == "n-boot":
                n_boot = int(rest)
            elif key == "model-hash":
                digest = rest
            elif key == "boot-file":
                boot_file = rest
            continue
        parts = raw.split("\t")
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, found {len(parts)}", line=lineno)
        try:
            idx.append(int(parts[0]))
            positions.append(int(parts[1]))
            maf.append(float(parts[2]))
            u.append(float(parts[3]))
        except ValueError as exc:
            raise ParseError(f"bad sumstats row: {exc}", line=lineno) from exc
    if seed is None or n_boot is None or boot_file is None:
        raise ParseError("missing #seed/#n-boot/#boot-file header", line=1)
    if idx != list(range(len(idx))):
        raise ParseError("variant indices must be 0..p-1 in order")
    boot_path = os.path.join(os.path.dirname(os.path.abspath(path)), boot_file)
    if not os.path.exists(boot_path):
        raise ParseError(f"bootstrap companion file not found: {boot_path}")
    payload = np.load(boot_path)
    if int(payload["seed"]) != seed or int(payload["n_boot"]) != n_boot:
        raise ParseError("bootstrap companion (seed, n_boot) disagrees with header")
    boot = payload["boot"]
    if boot.shape != (n_boot, len(idx)):
        raise ParseError(
            f"bootstrap matrix shape {boot.shape} != ({n_boot}, {len(idx)})"
        )
    scores = ScoreSet(
        u=np.array(u), boot=np.asarray(boot, dtype=np.float64), n_boot=n_boot, seed=seed
    )
    return scores, np.array(positions, dtype=np.int64), np.array(maf), digest


# ---------------------------------------------------------------------------
# block results (binary wire format)


def serialize_block_result(block: BlockResult) -> bytes:
    """Canonical checksummed byte encoding of one block's payload."""
    body = bytearray()
    body += struct.pack("<I", BLOCK_VERSION)
    body += struct.pack(
        "<qqqdqQq",
        block.block_id,
        block.block_region.start,
        block.block_region.end,
        block.block_stat,
        block.n_boot,
        int(block.seed) & 0xFFFFFFFFFFFFFFFF,
        len(block.detected),
    )
    for reg, stat, thr in zip(
        block.detected, block.detected_stats, block.detected_thresholds
    ):
        body += struct.pack("<qqdd", reg.start, reg.end, stat, thr)
    body += np.ascontiguousarray(block.m_vec, dtype="<f8").tobytes()
    body += np.ascontiguousarray(block.l_vec, dtype="<f8").tobytes()
    checksum = zlib.crc32(bytes(body))
    return BLOCK_MAGIC + bytes(body) + struct.pack("<I", checksum)


def deserialize_block_result(raw: bytes) -> BlockResult:
    if len(raw) < 8 or raw[:4] != BLOCK_MAGIC:
        raise CorruptPayload("bad magic bytes")
    body, (checksum,) = raw[4:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) != checksum:
        raise CorruptPayload("checksum mismatch")
    (version,) = struct.unpack_from("<I", body, 0)
    if version != BLOCK_VERSION:
        raise VersionMismatch(f"unsupported block-result version {version}")
    offset = 4
    header_fmt = "<qqqdqQq"
    try:
        block_id, start, end, block_stat, n_boot, seed, n_regions = struct.unpack_from(
            header_fmt, body, offset
        )
        offset += struct.calcsize(header_fmt)
        detected, stats, thresholds = [], [], []
        for _ in range(n_regions):
            r_start, r_end, stat, thr = struct.unpack_from("<qqdd", body, offset)
            offset += struct.calcsize("<qqdd")
            detected.append(Region(r_start, r_end))
            stats.append(stat)
            thresholds.append(thr)
        vec_bytes = 8 * n_boot
        if len(body) - offset != 2 * vec_bytes:
            raise CorruptPayload("payload length inconsistent with n_boot")
        m_vec = np.frombuffer(body, dtype="<f8", count=n_boot, offset=offset).copy()
        l_vec = np.frombuffer(
            body, dtype="<f8", count=n_boot, offset=offset + vec_bytes
        ).copy()
    except (struct.error, ValueError) as exc:
        raise CorruptPayload(f"malformed block payload: {exc}") from exc
    return BlockResult(
        block_id=block_id,
        block_region=Region(start, end),
        detected=detected,
        detected_stats=stats,
        detected_thresholds=thresholds,
        block_stat=block_stat,
        m_vec=m_vec,
        l_vec=l_vec,
        n_boot=n_boot,
        seed=seed,
    )
