"""Parsers for the two public skeleton text formats plus a synthetic source.

Both layouts are driven by config structs rather than hard-coded constants,
so distribution variants (extra columns, different joint counts) only need
different parameters.  Parsers take already-decoded text, raise
``FormatError`` with file position on any malformed input, and never leak
other exceptions, however hostile the bytes.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .skeleton import Joint3, SkeletonFrame, SkeletonSequence

# a<action>_s<subject>_e<episode>, e.g. "a12_s03_e02"
MSR_NAME_RE = re.compile(r"a(\d+)_s(\d+)_e(\d+)", re.IGNORECASE)
# S<setup>C<camera>P<performer>R<replication>A<action>
NTU_NAME_RE = re.compile(
    r"S(\d+)C(\d+)P(\d+)R(\d+)A(\d+)", re.IGNORECASE
)


@dataclass(frozen=True)
class MsrFormatConfig:
    joints_per_frame: int = 20
    values_per_row: int = 4  # x, y, z, confidence

    def __post_init__(self):
        if self.joints_per_frame < 2:
            raise ValueError("joints_per_frame must be >= 2")
        if self.values_per_row < 3:
            raise ValueError("values_per_row must be >= 3")


@dataclass(frozen=True)
class NtuFormatConfig:
    joints_per_body: int = 25
    # x, y, z, depth u/v, color u/v, orientation w/x/y/z, tracking state
    values_per_joint_row: int = 12

    def __post_init__(self):
        if self.joints_per_body < 2:
            raise ValueError("joints_per_body must be >= 2")
        if self.values_per_joint_row < 3:
            raise ValueError("values_per_joint_row must be >= 3")


def parse_msr_name(name: str, pattern: re.Pattern = MSR_NAME_RE):
    """(label, subject, episode) from an `aAA_sSS_eEE` style name, or None."""
    m = pattern.search(name)
    if not m:
        return None
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def parse_ntu_name(name: str, pattern: re.Pattern = NTU_NAME_RE):
    """(label, subject, camera) from an `SsssCcccPpppRrrrAaaa` name, or None."""
    m = pattern.search(name)
    if not m:
        return None
    return int(m.group(5)), int(m.group(3)), int(m.group(2))


def _finite(token: str, path, line=None, offset=None) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FormatError(
            f"non-numeric token {token!r}", path=path, line=line, offset=offset
        ) from None
    if not math.isfinite(value):
        raise FormatError(
            f"non-finite value {token!r}", path=path, line=line, offset=offset
        )
    return value


def parse_msr(
    text: str,
    cfg: MsrFormatConfig = MsrFormatConfig(),
    name: str | None = None,
    path=None,
) -> SkeletonSequence:
    """Parse the plain-rows layout: one joint per line, one block per frame.

    Label and subject come from `name` when it matches `aAA_sSS_eEE`;
    otherwise they stay 0.
    """
    tokens_per_line: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != cfg.values_per_row:
            raise FormatError(
                f"expected {cfg.values_per_row} values per row, got {len(tokens)}",
                path=path,
                line=lineno,
            )
        tokens_per_line.append((lineno, tokens))

    if not tokens_per_line:
        raise FormatError("no skeleton rows found", path=path)
    if len(tokens_per_line) % cfg.joints_per_frame != 0:
        raise FormatError(
            f"row count {len(tokens_per_line)} not divisible by {cfg.joints_per_frame}",
            path=path,
        )

    try:
        values = np.array([toks for _, toks in tokens_per_line], dtype=np.float64)
    except ValueError:
        values = None
    if values is None or not np.all(np.isfinite(values)):
        # fall back to a scalar scan to pinpoint the offending line
        for lineno, toks in tokens_per_line:
            for tok in toks:
                _finite(tok, path, line=lineno)
        raise FormatError("unparseable numeric data", path=path)
    rows = values

    label = subject = 0
    if name:
        parsed = parse_msr_name(name)
        if parsed:
            label, subject, _ = parsed

    frames = []
    has_conf = cfg.values_per_row >= 4
    for t in range(rows.shape[0] // cfg.joints_per_frame):
        block = rows[t * cfg.joints_per_frame : (t + 1) * cfg.joints_per_frame]
        frames.append(
            SkeletonFrame(
                joints=tuple(Joint3(r[0], r[1], r[2]) for r in block),
                timestamp_index=t + 1,
                confidences=tuple(map(float, block[:, 3])) if has_conf else None,
            )
        )
    return SkeletonSequence(
        frames=tuple(frames),
        label=label,
        subject_id=subject,
        joint_count=cfg.joints_per_frame,
    )


def serialize_msr(seq: SkeletonSequence, cfg: MsrFormatConfig = MsrFormatConfig()) -> str:
    """Inverse of parse_msr; float repr keeps the round trip exact."""
    lines = []
    extra = cfg.values_per_row - 4
    for frame in seq.frames:
        confs = frame.confidences or (1.0,) * len(frame.joints)
        for joint, conf in zip(frame.joints, confs):
            fields = [repr(joint.x), repr(joint.y), repr(joint.z)]
            if cfg.values_per_row >= 4:
                fields.append(repr(conf))
                fields.extend(["0"] * extra)
            lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


class _LineReader:
    """Line cursor over text that remembers the character offset."""

    def __init__(self, text: str, path=None):
        self._lines = text.splitlines(keepends=True)
        self._i = 0
        self.offset = 0
        self.path = path

    def next_tokens(self, what: str) -> list[str]:
        while self._i < len(self._lines):
            line = self._lines[self._i]
            self._i += 1
            start = self.offset
            self.offset += len(line)
            tokens = line.split()
            if tokens:
                self.last_start = start
                return tokens
        raise FormatError(
            f"truncated file: expected {what}", path=self.path, offset=self.offset
        )

    def next_int(self, what: str) -> int:
        tokens = self.next_tokens(what)
        if len(tokens) != 1:
            raise FormatError(
                f"expected a single integer for {what}, got {tokens!r}",
                path=self.path,
                offset=self.last_start,
            )
        try:
            return int(tokens[0])
        except ValueError:
            raise FormatError(
                f"expected an integer for {what}, got {tokens[0]!r}",
                path=self.path,
                offset=self.last_start,
            ) from None


def parse_ntu(
    text: str,
    cfg: NtuFormatConfig = NtuFormatConfig(),
    name: str | None = None,
    path=None,
) -> list[SkeletonSequence]:
    """Parse the framed `.skeleton` layout into one sequence per tracked body.

    Frames where a body is missing are simply absent from that body's
    sequence (frame indices are renumbered to stay contiguous).  Bodies are
    returned in order of first appearance.
    """
    reader = _LineReader(text, path=path)
    frame_count = reader.next_int("frame count")
    if frame_count < 1:
        raise FormatError(f"frame count must be >= 1, got {frame_count}", path=path)

    label = subject = camera = 0
    if name:
        parsed = parse_ntu_name(name)
        if parsed:
            label, subject, camera = parsed

    bodies: dict[str, list[SkeletonFrame]] = {}
    for _ in range(frame_count):
        body_count = reader.next_int("body count")
        if body_count < 0:
            raise FormatError(
                f"body count must be >= 0, got {body_count}",
                path=path,
                offset=reader.last_start,
            )
        for _ in range(body_count):
            header = reader.next_tokens("body header")
            body_id = header[0]
            joint_count = reader.next_int("joint count")
            if joint_count != cfg.joints_per_body:
                raise FormatError(
                    f"declared joint count {joint_count} != configured "
                    f"{cfg.joints_per_body}",
                    path=path,
                    offset=reader.last_start,
                )
            joints = []
            for _ in range(joint_count):
                tokens = reader.next_tokens("joint row")
                if len(tokens) < 3:
                    raise FormatError(
                        f"joint row needs at least 3 values, got {len(tokens)}",
                        path=path,
                        offset=reader.last_start,
                    )
                x, y, z = (
                    _finite(tokens[0], path, offset=reader.last_start),
                    _finite(tokens[1], path, offset=reader.last_start),
                    _finite(tokens[2], path, offset=reader.last_start),
                )
                joints.append(Joint3(x, y, z))
            frames = bodies.setdefault(body_id, [])
            frames.append(
                SkeletonFrame(joints=tuple(joints), timestamp_index=len(frames) + 1)
            )

    return [
        SkeletonSequence(
            frames=tuple(frames),
            label=label,
            subject_id=subject,
            camera_id=camera,
            joint_count=cfg.joints_per_body,
        )
        for frames in bodies.values()
    ]


def serialize_ntu(
    seq: SkeletonSequence, cfg: NtuFormatConfig = NtuFormatConfig(), body_id: int = 0
) -> str:
    """Write one body back to the framed layout (metadata columns zeroed)."""
    pad = ["0"] * (cfg.values_per_joint_row - 3)
    lines = [str(seq.frame_count)]
    for frame in seq.frames:
        lines.append("1")
        lines.append(" ".join([str(body_id)] + ["0"] * 9))
        lines.append(str(len(frame.joints)))
        for joint in frame.joints:
            lines.append(" ".join([repr(joint.x), repr(joint.y), repr(joint.z)] + pad))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SynthTemplate:
    """Deterministic trajectory generator for one synthetic action class.

    Joint j follows base_pose[j] plus a sinusoid with per-joint amplitude
    vector, frequency (cycles over the clip), and phase; Gaussian noise of
    sigma noise_sigma is added on top.
    """

    class_id: int
    base_pose: tuple[Joint3, ...]
    amplitudes: tuple[tuple[float, float, float], ...]
    frequencies: tuple[float, ...]
    phases: tuple[float, ...]
    noise_sigma: float = 0.0

    def __post_init__(self):
        n = len(self.base_pose)
        if not (len(self.amplitudes) == len(self.frequencies) == len(self.phases) == n):
            raise ValueError("per-joint parameter lengths must match base_pose")
        if any(a < 0 for amp in self.amplitudes for a in amp):
            raise ValueError("amplitudes must be >= 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


def random_template(
    class_id: int,
    joint_count: int,
    seed: int,
    noise_sigma: float = 0.0,
    amplitude: float = 0.5,
) -> SynthTemplate:
    """A reproducible template with a distinct trajectory per (class, seed)."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(-1.0, 1.0, size=(joint_count, 3))
    amps = rng.uniform(0.1 * amplitude, amplitude, size=(joint_count, 3))
    freqs = rng.uniform(0.5, 3.0, size=joint_count)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=joint_count)
    return SynthTemplate(
        class_id=class_id,
        base_pose=tuple(Joint3(*map(float, p)) for p in base),
        amplitudes=tuple(tuple(map(float, a)) for a in amps),
        frequencies=tuple(map(float, freqs)),
        phases=tuple(map(float, phases)),
        noise_sigma=noise_sigma,
    )


def synth_sequence(template: SynthTemplate, n_frames: int, seed: int) -> SkeletonSequence:
    """Render a template to frames; same (template, n_frames, seed) in,
    same sequence out."""
    if n_frames < 2:
        raise ValueError(f"n_frames must be >= 2, got {n_frames}")
    rng = np.random.default_rng(seed)
    joints = len(template.base_pose)
    base = np.array([(j.x, j.y, j.z) for j in template.base_pose])
    amps = np.array(template.amplitudes)
    freqs = np.array(template.frequencies)
    phases = np.array(template.phases)

    t = np.arange(n_frames, dtype=np.float64)[:, None]  # (N, 1)
    angle = 2.0 * np.pi * freqs[None, :] * t / n_frames + phases[None, :]
    coords = base[None, :, :] + amps[None, :, :] * np.sin(angle)[:, :, None]
    if template.noise_sigma > 0:
        coords = coords + rng.normal(0.0, template.noise_sigma, size=coords.shape)

    frames = tuple(
        SkeletonFrame(
            joints=tuple(Joint3(*map(float, p)) for p in coords[i]),
            timestamp_index=i + 1,
        )
        for i in range(n_frames)
    )
    return SkeletonSequence(frames=frames, label=template.class_id, joint_count=joints)
