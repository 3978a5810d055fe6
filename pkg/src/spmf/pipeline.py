"""Corpus-level orchestration: manifests, splits, stats, bulk encoding.

A manifest is a JSON document naming every sample (id, source path, label,
subject, camera) plus an evaluation protocol and its parameters.  Encoding
walks the manifest, writes one resized PNG per sample (and per augmentation
replica on the train split), and emits a JSON-lines index that downstream
trainers consume.  Per-sample failures become error rows in the index and
never abort the run; everything else is deterministic, so re-running a
manifest overwrites the corpus with identical bytes.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import protocols
from .augment import AugmentConfig, augment_image, replica_rng
from .encoder import DistanceStats, build_spmf, resize_image
from .errors import FormatError, ManifestError, SpmfError, StatsError
from .ingest import (
    MsrFormatConfig,
    NtuFormatConfig,
    parse_msr,
    parse_msr_name,
    parse_ntu,
    parse_ntu_name,
)
from .pngio import encode_png
from .skeleton import SkeletonSequence

PROTOCOLS = (
    "msr_as1",
    "msr_as2",
    "msr_as3",
    "ntu_cross_subject",
    "ntu_cross_view",
    "custom",
)


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    source_path: str
    label: int
    subject_id: int = 0
    camera_id: int = 0


@dataclass(frozen=True)
class DatasetManifest:
    dataset: str
    format: str  # "msr" | "ntu"
    protocol: str
    protocol_params: dict
    entries: tuple[ManifestEntry, ...]
    format_config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.format not in ("msr", "ntu"):
            raise ManifestError(f"unknown source format {self.format!r}")
        if self.protocol not in PROTOCOLS:
            raise ManifestError(f"unknown protocol {self.protocol!r}")
        ids = [e.sample_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestError(f"duplicate sample ids: {dupes}")

    def parser_config(self):
        if self.format == "msr":
            return MsrFormatConfig(**self.format_config)
        return NtuFormatConfig(**self.format_config)


@dataclass(frozen=True)
class SplitAssignment:
    train: tuple[str, ...]
    test: tuple[str, ...]


def manifest_from_dict(doc: dict) -> DatasetManifest:
    try:
        entries = tuple(
            ManifestEntry(
                sample_id=str(e["sample_id"]),
                source_path=str(e["source_path"]),
                label=int(e["label"]),
                subject_id=int(e.get("subject_id", 0)),
                camera_id=int(e.get("camera_id", 0)),
            )
            for e in doc["entries"]
        )
        return DatasetManifest(
            dataset=str(doc.get("dataset", "dataset")),
            format=str(doc["format"]),
            protocol=str(doc["protocol"]),
            protocol_params=dict(doc.get("protocol_params", {})),
            entries=entries,
            format_config=dict(doc.get("format_config", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"malformed manifest: {exc}") from exc


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    return manifest_from_dict(doc)


def manifest_to_dict(manifest: DatasetManifest) -> dict:
    return {
        "dataset": manifest.dataset,
        "format": manifest.format,
        "format_config": dict(manifest.format_config),
        "protocol": manifest.protocol,
        "protocol_params": dict(manifest.protocol_params),
        "entries": [
            {
                "sample_id": e.sample_id,
                "source_path": e.source_path,
                "label": e.label,
                "subject_id": e.subject_id,
                "camera_id": e.camera_id,
            }
            for e in manifest.entries
        ],
    }


def manifest_from_directory(
    directory,
    fmt: str,
    protocol: str,
    dataset: str | None = None,
    pattern: str | None = None,
) -> DatasetManifest:
    """Scan a directory of skeleton files, pulling metadata from filenames."""
    directory = Path(directory)
    if pattern is None:
        pattern = "*.txt" if fmt == "msr" else "*.skeleton"
    entries = []
    for path in sorted(directory.glob(pattern)):
        stem = path.name
        if fmt == "msr":
            parsed = parse_msr_name(stem)
            if parsed is None:
                continue
            label, subject, _ = parsed
            camera = 0
        else:
            parsed = parse_ntu_name(stem)
            if parsed is None:
                continue
            label, subject, camera = parsed
        entries.append(
            ManifestEntry(
                sample_id=path.stem,
                source_path=str(path),
                label=label,
                subject_id=subject,
                camera_id=camera,
            )
        )
    return DatasetManifest(
        dataset=dataset or directory.name,
        format=fmt,
        protocol=protocol,
        protocol_params=protocols.default_params(protocol),
        entries=tuple(entries),
    )


def _require(params: dict, key: str, protocol: str):
    if key not in params:
        raise ManifestError(f"protocol {protocol!r} needs parameter {key!r}")
    return params[key]


def split_dataset(manifest: DatasetManifest) -> SplitAssignment:
    """Deterministic train/test assignment per the manifest's protocol."""
    params = manifest.protocol_params
    protocol = manifest.protocol
    train: list[str] = []
    test: list[str] = []

    if protocol == "custom":
        known = {e.sample_id for e in manifest.entries}
        train_ids = [str(i) for i in _require(params, "train_ids", protocol)]
        test_ids = [str(i) for i in _require(params, "test_ids", protocol)]
        overlap = set(train_ids) & set(test_ids)
        if overlap:
            raise ManifestError(f"ids in both splits: {sorted(overlap)}")
        missing = (set(train_ids) | set(test_ids)) - known
        if missing:
            raise ManifestError(f"split ids not in manifest: {sorted(missing)}")
        return SplitAssignment(train=tuple(train_ids), test=tuple(test_ids))

    if protocol.startswith("msr_"):
        classes = set(_require(params, "classes", protocol))
        train_subjects = set(_require(params, "train_subjects", protocol))
        test_subjects = set(_require(params, "test_subjects", protocol))
        if train_subjects & test_subjects:
            raise ManifestError("train and test subjects overlap")
        for e in manifest.entries:
            if e.label not in classes:
                continue  # outside this subset's class list
            if e.subject_id in train_subjects:
                train.append(e.sample_id)
            elif e.subject_id in test_subjects:
                test.append(e.sample_id)
            else:
                raise ManifestError(
                    f"sample {e.sample_id}: subject {e.subject_id} not in "
                    "configured subject lists"
                )
        return SplitAssignment(train=tuple(train), test=tuple(test))

    if protocol == "ntu_cross_subject":
        train_subjects = set(_require(params, "train_subjects", protocol))
        test_subjects = set(params["test_subjects"]) if "test_subjects" in params else None
        classes = set(params["classes"]) if "classes" in params else None
        for e in manifest.entries:
            if classes is not None and e.label not in classes:
                continue
            if e.subject_id in train_subjects:
                train.append(e.sample_id)
            elif test_subjects is None or e.subject_id in test_subjects:
                test.append(e.sample_id)
            else:
                raise ManifestError(
                    f"sample {e.sample_id}: subject {e.subject_id} not in "
                    "configured subject lists"
                )
        return SplitAssignment(train=tuple(train), test=tuple(test))

    # ntu_cross_view
    train_cameras = set(params.get("train_cameras", protocols.NTU_TRAIN_CAMERAS))
    test_cameras = set(params.get("test_cameras", protocols.NTU_TEST_CAMERAS))
    if train_cameras & test_cameras:
        raise ManifestError("train and test cameras overlap")
    classes = set(params["classes"]) if "classes" in params else None
    for e in manifest.entries:
        if classes is not None and e.label not in classes:
            continue
        if e.camera_id in train_cameras:
            train.append(e.sample_id)
        elif e.camera_id in test_cameras:
            test.append(e.sample_id)
        else:
            raise ManifestError(
                f"sample {e.sample_id}: camera {e.camera_id} not in "
                "configured camera lists"
            )
    return SplitAssignment(train=tuple(train), test=tuple(test))


def load_entry_sequences(
    manifest: DatasetManifest, entry: ManifestEntry, base_dir=None
) -> list[SkeletonSequence]:
    """Parse one entry's source file into its sequences (one per body)."""
    path = Path(entry.source_path)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    try:
        text = path.read_text()
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(f"cannot read source: {exc}", path=path) from exc
    cfg = manifest.parser_config()
    if manifest.format == "msr":
        seq = parse_msr(text, cfg, name=entry.sample_id, path=path)
        seq = _with_identity(seq, entry)
        return [seq]
    return [_with_identity(s, entry) for s in parse_ntu(text, cfg, name=entry.sample_id, path=path)]


def _with_identity(seq: SkeletonSequence, entry: ManifestEntry) -> SkeletonSequence:
    return SkeletonSequence(
        frames=seq.frames,
        label=entry.label,
        subject_id=entry.subject_id,
        camera_id=entry.camera_id,
        joint_count=seq.joint_count,
    )


def iter_sequences(manifest: DatasetManifest, base_dir=None, sample_ids=None,
                   skip_errors=False, on_skip=None):
    """Yield every sequence in the manifest (all bodies).

    With skip_errors, unreadable or malformed sources are dropped (after
    calling on_skip(sample_id, error) if given) instead of aborting.
    """
    wanted = set(sample_ids) if sample_ids is not None else None
    for entry in manifest.entries:
        if wanted is not None and entry.sample_id not in wanted:
            continue
        try:
            yield from load_entry_sequences(manifest, entry, base_dir=base_dir)
        except FormatError as exc:
            if not skip_errors:
                raise
            if on_skip is not None:
                on_skip(entry.sample_id, exc)


def compute_stats(sequences, source: str = "") -> DistanceStats:
    """Largest within-frame joint-pair distance over a sequence corpus."""
    d_max = 0.0
    seen = False
    for seq in sequences:
        pts = seq.as_array()
        joints = pts.shape[1]
        if joints < 2:
            continue
        seen = True
        jj, kk = np.triu_indices(joints, k=1)
        diff = pts[:, jj, :] - pts[:, kk, :]
        d2 = (
            diff[:, :, 0] * diff[:, :, 0]
            + diff[:, :, 1] * diff[:, :, 1]
            + diff[:, :, 2] * diff[:, :, 2]
        )
        d_max = max(d_max, float(np.sqrt(np.max(d2))))
    if not seen:
        raise StatsError("empty corpus: no sequence with at least 2 joints")
    if d_max <= 0.0:
        raise StatsError("all joints coincide everywhere: d_max = 0")
    return DistanceStats(d_max=d_max, source=source)


def save_stats(stats: DistanceStats, path, params: dict | None = None) -> None:
    record = {
        "d_min": stats.d_min,
        "d_max": stats.d_max,
        "source": stats.source,
        "params": params or {},
    }
    Path(path).write_text(json.dumps(record, indent=2) + "\n")


def load_stats(path) -> DistanceStats:
    try:
        doc = json.loads(Path(path).read_text())
        return DistanceStats(d_max=float(doc["d_max"]), source=str(doc.get("source", "")))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise StatsError(f"cannot read stats record {path}: {exc}") from exc


@dataclass(frozen=True)
class EncodeConfig:
    out_width: int = 32
    out_height: int = 32
    replicas: int = 0  # augmented copies per train sample, originals kept
    augment: AugmentConfig = AugmentConfig()
    jobs: int = 1
    keep_raw: bool = False

    def __post_init__(self):
        if self.out_width < 1 or self.out_height < 1:
            raise ValueError("output size must be >= 1x1")
        if self.replicas < 0:
            raise ValueError("replicas must be >= 0")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def _encode_entry(manifest, entry, split_of, stats, cfg, out_dir, base_dir):
    """Encode one sample; returns its index rows (data or error)."""
    sample_split = split_of.get(entry.sample_id)
    if sample_split is None:
        return []
    try:
        sequences = load_entry_sequences(manifest, entry, base_dir=base_dir)
        seq = sequences[0]
        raw = build_spmf(seq, stats)
        resized = resize_image(raw, cfg.out_width, cfg.out_height)
    except SpmfError as exc:
        return [{"sample_id": entry.sample_id, "split": sample_split, "error": str(exc)}]
    except ValueError as exc:
        return [{"sample_id": entry.sample_id, "split": sample_split, "error": str(exc)}]

    subdir = Path(sample_split) / str(entry.label)
    target_dir = out_dir / subdir
    target_dir.mkdir(parents=True, exist_ok=True)

    def _row(image, replica, suffix=""):
        fname = f"{manifest.dataset}_{entry.sample_id}_spmf{suffix}.png"
        (target_dir / fname).write_bytes(encode_png(image.pixels))
        row = {
            "sample_id": entry.sample_id,
            "path": str(subdir / fname),
            "label": entry.label,
            "split": sample_split,
            "replica": replica,
        }
        if len(sequences) > 1:
            row["caveat"] = f"{len(sequences)} bodies in source; encoded the first"
        return row

    rows = [_row(resized, 0)]
    if cfg.keep_raw:
        raw_name = f"{manifest.dataset}_{entry.sample_id}_spmf_raw.png"
        (target_dir / raw_name).write_bytes(encode_png(raw.pixels))
    if sample_split == "train":
        for replica in range(1, cfg.replicas + 1):
            rng = replica_rng(cfg.augment.seed, entry.sample_id, replica)
            augmented = augment_image(resized, cfg.augment, rng)
            rows.append(_row(augmented, replica, suffix=f"_r{replica}"))
    return rows


def encode_corpus(
    manifest: DatasetManifest,
    stats: DistanceStats,
    cfg: EncodeConfig,
    out_dir,
    base_dir=None,
) -> dict:
    """Encode every split-eligible sample to PNG and write index.jsonl.

    Returns a summary with sample/replica/error counts.  The index is
    written in manifest order whatever the worker count, so output is
    deterministic.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    split = split_dataset(manifest)
    split_of = {sid: "train" for sid in split.train}
    split_of.update({sid: "test" for sid in split.test})

    def work(entry):
        return _encode_entry(manifest, entry, split_of, stats, cfg, out_dir, base_dir)

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            per_entry = list(pool.map(work, manifest.entries))
    else:
        per_entry = [work(entry) for entry in manifest.entries]

    rows = [row for rows_ in per_entry for row in rows_]
    index_path = out_dir / "index.jsonl"
    with index_path.open("w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    errors = sum(1 for row in rows if "error" in row)
    return {
        "index": str(index_path),
        "rows": len(rows),
        "train": len(split.train),
        "test": len(split.test),
        "replicas": cfg.replicas,
        "errors": errors,
    }


def read_index(index_path) -> list[dict]:
    rows = []
    with Path(index_path).open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
