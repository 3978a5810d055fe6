"""Straight-line reference encoder used as an independent oracle in tests.

Everything here is deliberately naive: plain Python loops over plain tuples,
no numpy, no imports from the package under test.  Sequences are given as
``frames``: a list of frames, each frame a list of ``(x, y, z)`` floats.
Images come back as row-major lists of ``(r, g, b)`` byte tuples.
"""

import math


def round_half_up(x):
    return int(math.floor(x + 0.5))


def _clamp01(x):
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


def jet_table():
    """256-entry blue-to-red lookup table from the piecewise-linear map."""
    table = []
    for i in range(256):
        v = i / 255
        r = _clamp01(1.5 - abs(4.0 * v - 3.0))
        g = _clamp01(1.5 - abs(4.0 * v - 2.0))
        b = _clamp01(1.5 - abs(4.0 * v - 1.0))
        table.append((round_half_up(r * 255), round_half_up(g * 255), round_half_up(b * 255)))
    return table


_JET = jet_table()


def jet_pixel(v):
    return _JET[round_half_up(v * 255)]


def orient_pixel(u):
    return tuple(round_half_up((c + 1.0) / 2.0 * 255) for c in u)


def distance(p, q):
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    dz = p[2] - q[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def unit(p, q, d):
    return ((p[0] - q[0]) / d, (p[1] - q[1]) / d, (p[2] - q[2]) / d)


def resolve_sentinels(pixels):
    """Replace None entries with the nearest non-None entry (ties go up)."""
    n = len(pixels)
    valid = [i for i, px in enumerate(pixels) if px is not None]
    out = []
    for i, px in enumerate(pixels):
        if px is not None:
            out.append(px)
            continue
        best = None
        best_dist = n + 1
        for j in valid:
            dist = abs(j - i)
            if dist < best_dist:  # strict: on ties the earlier index wins
                best = j
                best_dist = dist
        out.append(pixels[best])
    return out


def pose_column(frame, d_max):
    """Jet pixels for every j<k pair, then orientation pixels below them."""
    joints = len(frame)
    jets = []
    orients = []
    for j in range(joints):
        for k in range(j + 1, joints):
            d = distance(frame[j], frame[k])
            jets.append(jet_pixel(_clamp01(d / d_max)))
            if d > 0.0:
                orients.append(orient_pixel(unit(frame[j], frame[k], d)))
            else:
                orients.append(None)
    return resolve_sentinels(jets + orients)


def motion_column(frame_t, frame_t1, d_max):
    """Same layout over the full ordered j,k grid across consecutive frames."""
    joints = len(frame_t)
    jets = []
    orients = []
    for j in range(joints):
        for k in range(joints):
            d = distance(frame_t[j], frame_t1[k])
            jets.append(jet_pixel(_clamp01(d / d_max)))
            if d > 0.0:
                orients.append(orient_pixel(unit(frame_t[j], frame_t1[k], d)))
            else:
                orients.append(None)
    return resolve_sentinels(jets + orients)


def reference_spmf(frames, d_max):
    """Interleave pose and motion columns and pad them to a common height.

    Returns a list of rows, each a list of (r, g, b) tuples, so
    ``result[y][x]`` is the pixel at column x, row y.
    """
    columns = []
    for t in range(len(frames)):
        columns.append(pose_column(frames[t], d_max))
        if t + 1 < len(frames):
            columns.append(motion_column(frames[t], frames[t + 1], d_max))
    height = max(len(col) for col in columns)
    padded = [col + [col[-1]] * (height - len(col)) for col in columns]
    return [[padded[x][y] for x in range(len(padded))] for y in range(height)]


def reference_d_max(sequences):
    """Largest within-frame pair distance over a corpus of frame lists."""
    best = 0.0
    for frames in sequences:
        for frame in frames:
            joints = len(frame)
            for j in range(joints):
                for k in range(j + 1, joints):
                    best = max(best, distance(frame[j], frame[k]))
    return best


def reference_resize(rows, out_w, out_h):
    """Bilinear resize with pixel-center alignment, rounded half up."""
    in_h = len(rows)
    in_w = len(rows[0])
    out = []
    for yo in range(out_h):
        ys = (yo + 0.5) * in_h / out_h - 0.5
        ys = min(max(ys, 0.0), in_h - 1.0)
        y0 = int(math.floor(ys))
        y1 = min(y0 + 1, in_h - 1)
        fy = ys - y0
        row = []
        for xo in range(out_w):
            xs = (xo + 0.5) * in_w / out_w - 0.5
            xs = min(max(xs, 0.0), in_w - 1.0)
            x0 = int(math.floor(xs))
            x1 = min(x0 + 1, in_w - 1)
            fx = xs - x0
            px = []
            for c in range(3):
                top = rows[y0][x0][c] * (1.0 - fx) + rows[y0][x1][c] * fx
                bot = rows[y1][x0][c] * (1.0 - fx) + rows[y1][x1][c] * fx
                px.append(round_half_up(top * (1.0 - fy) + bot * fy))
            row.append(tuple(px))
        out.append(row)
    return out
