"""Video clip container, synthetic training corpus, cropping, raw file I/O.

The synthetic corpus produces temporally coherent moving-texture clips so
the full pipeline trains and evaluates without any external dataset.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, InvalidSpecError, ShapeError
from .seeding import numpy_rng

VALUE_RANGES = ("unit", "byte")

MOTION_KINDS = ("translate", "rotate", "scale")
TEXTURE_KINDS = ("flat", "gradient", "noise-texture")


@dataclass
class VideoClip:
    """A T x H x W x C pixel array with a declared value range.

    ``unit`` clips are float64 in [0, 1]; ``byte`` clips are uint8.
    ``frame_rate`` is carried as metadata only.
    """

    frames: np.ndarray
    value_range: str = "unit"
    frame_rate: float = 25.0

    def __post_init__(self):
        f = np.asarray(self.frames)
        if f.ndim != 4 or f.shape[0] < 1 or f.shape[3] != 3:
            raise ShapeError(f"expected (T, H, W, 3) frames, got {f.shape}")
        if self.value_range == "unit":
            f = f.astype(np.float64, copy=False)
            if f.size and (f.min() < 0.0 or f.max() > 1.0):
                raise DataError("unit-range clip has values outside [0, 1]")
        elif self.value_range == "byte":
            if f.dtype != np.uint8:
                raise DataError(f"byte-range clip must be uint8, got {f.dtype}")
        else:
            raise DataError(f"unknown value range {self.value_range!r}")
        self.frames = f

    @property
    def shape(self):
        return self.frames.shape

    def to_unit(self) -> "VideoClip":
        """Return a unit-range view of this clip (copy only if byte)."""
        if self.value_range == "unit":
            return self
        return VideoClip(self.frames.astype(np.float64) / 255.0, "unit", self.frame_rate)


@dataclass
class SyntheticCorpusSpec:
    """Recipe for a deterministic corpus of moving-texture clips."""

    num_clips: int
    frames_per_clip: int = 16
    height: int = 64
    width: int = 64
    motion_kinds: tuple = MOTION_KINDS
    texture_kinds: tuple = TEXTURE_KINDS
    seed: int = 0

    def validate(self):
        if self.num_clips < 0:
            raise InvalidSpecError("num_clips must be >= 0")
        if self.frames_per_clip < 1 or self.height < 1 or self.width < 1:
            raise InvalidSpecError("frames_per_clip, height, width must all be >= 1")
        bad = set(self.motion_kinds) - set(MOTION_KINDS)
        if bad or not self.motion_kinds:
            raise InvalidSpecError(f"unknown or empty motion kinds: {sorted(bad)}")
        bad = set(self.texture_kinds) - set(TEXTURE_KINDS)
        if bad or not self.texture_kinds:
            raise InvalidSpecError(f"unknown or empty texture kinds: {sorted(bad)}")


def _texture(kind, u, v, rng):
    """Evaluate a texture on local coordinates u, v (roughly [-1, 1])."""
    if kind == "flat":
        return np.full(u.shape, rng.uniform(0.1, 0.9))
    if kind == "gradient":
        ang = rng.uniform(0.0, 2 * np.pi)
        lo, hi = sorted(rng.uniform(0.05, 0.95, size=2))
        ramp = (u * np.cos(ang) + v * np.sin(ang) + 2.0) / 4.0
        return lo + (hi - lo) * np.clip(ramp, 0.0, 1.0)
    if kind == "noise-texture":
        # Low-res random grid, bilinearly interpolated: smooth but textured.
        grid = rng.uniform(0.05, 0.95, size=(5, 5))
        gu = np.clip((u + 2.0) / 4.0, 0.0, 1.0) * 4.0
        gv = np.clip((v + 2.0) / 4.0, 0.0, 1.0) * 4.0
        i0 = np.minimum(gu.astype(int), 3)
        j0 = np.minimum(gv.astype(int), 3)
        fu, fv = gu - i0, gv - j0
        return (
            grid[i0, j0] * (1 - fu) * (1 - fv)
            + grid[i0 + 1, j0] * fu * (1 - fv)
            + grid[i0, j0 + 1] * (1 - fu) * fv
            + grid[i0 + 1, j0 + 1] * fu * fv
        )
    raise InvalidSpecError(f"unknown texture kind {kind!r}")


def _paint_shape(frame, shape_kind, cy, cx, ry, rx, angle, texture_kind, tint, rng_state):
    """Draw one textured, tinted shape onto ``frame`` in place."""
    h, w = frame.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    dy, dx = ys - cy, xs - cx
    ca, sa = np.cos(angle), np.sin(angle)
    # Local coordinates rotate with the shape, so its texture moves rigidly.
    lu = (ca * dy + sa * dx) / max(ry, 1e-9)
    lv = (-sa * dy + ca * dx) / max(rx, 1e-9)
    if shape_kind == "ellipse":
        mask = lu**2 + lv**2 <= 1.0
    else:
        mask = (np.abs(lu) <= 1.0) & (np.abs(lv) <= 1.0)
    tex = _texture(texture_kind, lu, lv, np.random.default_rng(rng_state))
    colored = tex[..., None] * np.asarray(tint)[None, None, :]
    frame[mask] = colored[mask]


def _clip_scene(spec, rng):
    """Sample one scene description: background, shapes, motion params."""
    h, w = spec.height, spec.width
    motion = rng.choice(sorted(spec.motion_kinds))
    textures = sorted(spec.texture_kinds)
    scene = {
        "motion": motion,
        "bg_kind": rng.choice(textures),
        "bg_state": int(rng.integers(0, 2**31)),
        "bg_tint": rng.uniform(0.5, 1.0, size=3),
        "shapes": [],
    }
    for _ in range(int(rng.integers(1, 4))):
        scene["shapes"].append(
            {
                "kind": rng.choice(["ellipse", "rect"]),
                "cy": rng.uniform(0.25 * h, 0.75 * h),
                "cx": rng.uniform(0.25 * w, 0.75 * w),
                "ry": rng.uniform(0.10 * h, 0.25 * h),
                "rx": rng.uniform(0.10 * w, 0.25 * w),
                "angle": rng.uniform(0.0, 2 * np.pi),
                "texture": rng.choice(textures),
                "tint": rng.uniform(0.5, 1.0, size=3),
                "state": int(rng.integers(0, 2**31)),
                # per-frame angular velocity / relative growth rate
                "spin": rng.uniform(-0.2, 0.2),
                "growth": rng.uniform(-0.03, 0.03),
            }
        )
    if motion == "translate":
        # Whole-scene integer scroll; bounded well under a quarter frame.
        vmax_y = max(1, h // 16)
        vmax_x = max(1, w // 16)
        scene["velocity"] = (
            int(rng.integers(-vmax_y, vmax_y + 1)),
            int(rng.integers(-vmax_x, vmax_x + 1)),
        )
    return scene


def _render_frame(spec, scene, t):
    h, w = spec.height, spec.width
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    u = 4.0 * ys / max(h - 1, 1) - 2.0
    v = 4.0 * xs / max(w - 1, 1) - 2.0
    bg = _texture(scene["bg_kind"], u, v, np.random.default_rng(scene["bg_state"]))
    frame = bg[..., None] * np.asarray(scene["bg_tint"])[None, None, :]
    for s in scene["shapes"]:
        if scene["motion"] == "rotate":
            angle = s["angle"] + s["spin"] * t
            ry, rx = s["ry"], s["rx"]
        elif scene["motion"] == "scale":
            angle = s["angle"]
            factor = np.clip(1.0 + s["growth"] * t, 0.5, 1.6)
            ry, rx = s["ry"] * factor, s["rx"] * factor
        else:
            angle, ry, rx = s["angle"], s["ry"], s["rx"]
        _paint_shape(
            frame, s["kind"], s["cy"], s["cx"], ry, rx, angle, s["texture"], s["tint"], s["state"]
        )
    return np.clip(frame, 0.0, 1.0)


def generate_synthetic_corpus(spec: SyntheticCorpusSpec):
    """Generate the deterministic clip list described by ``spec``.

    Translating clips scroll the whole scene by a constant integer vector
    per frame (toroidal wrap), so frame t+1 equals frame t shifted.
    Rotating/scaling clips animate shape parameters over a static
    background. Identical spec and seed give a bit-identical corpus.
    """
    spec.validate()
    clips = []
    for idx in range(spec.num_clips):
        rng = numpy_rng(spec.seed, "clip", idx)
        scene = _clip_scene(spec, rng)
        if scene["motion"] == "translate":
            first = _render_frame(spec, scene, 0)
            vy, vx = scene["velocity"]
            frames = [first]
            for _ in range(1, spec.frames_per_clip):
                frames.append(np.roll(frames[-1], (vy, vx), axis=(0, 1)))
            frames = np.stack(frames)
        else:
            frames = np.stack([_render_frame(spec, scene, t) for t in range(spec.frames_per_clip)])
        clips.append(VideoClip(frames, "unit"))
    return clips


def random_crop(clip: VideoClip, crop_h: int, crop_w: int, seed: int) -> VideoClip:
    """Crop the same spatial window from every frame, offset drawn from seed."""
    t, h, w, _ = clip.shape
    if crop_h > h or crop_w > w or crop_h < 1 or crop_w < 1:
        raise ShapeError(f"crop {crop_h}x{crop_w} out of bounds for {h}x{w} frames")
    rng = numpy_rng(seed, "crop")
    oy = int(rng.integers(0, h - crop_h + 1))
    ox = int(rng.integers(0, w - crop_w + 1))
    return VideoClip(
        clip.frames[:, oy : oy + crop_h, ox : ox + crop_w, :].copy(),
        clip.value_range,
        clip.frame_rate,
    )


def _sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def save_raw_clip(clip: VideoClip, path) -> None:
    """Write raw interleaved pixels plus a JSON sidecar.

    Layout is frame-major, then row, column, channel. Byte-range clips
    store one uint8 per value; unit-range clips store little-endian
    float64 (8 bytes per value).
    """
    path = Path(path)
    t, h, w, c = clip.shape
    if clip.value_range == "byte":
        payload = clip.frames.tobytes(order="C")
    else:
        payload = clip.frames.astype("<f8", copy=False).tobytes(order="C")
    path.write_bytes(payload)
    sidecar = {
        "frames": t,
        "height": h,
        "width": w,
        "channels": c,
        "range": clip.value_range,
        "fps": clip.frame_rate,
    }
    _sidecar_path(path).write_text(json.dumps(sidecar, indent=2) + "\n")


def load_raw_clip(path, header: dict | None = None) -> VideoClip:
    """Read a raw clip; header defaults to the JSON sidecar next to it."""
    path = Path(path)
    if header is None:
        sidecar = _sidecar_path(path)
        if not sidecar.exists():
            raise DataError(f"missing sidecar {sidecar}")
        header = json.loads(sidecar.read_text())
    try:
        t, h, w, c = (int(header[k]) for k in ("frames", "height", "width", "channels"))
        rng_kind = header["range"]
        fps = float(header.get("fps", 25.0))
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"bad raw clip header: {exc}") from exc
    raw = path.read_bytes()
    itemsize = 1 if rng_kind == "byte" else 8
    expected = t * h * w * c * itemsize
    if len(raw) != expected:
        raise DataError(f"{path}: expected {expected} bytes, found {len(raw)}")
    if rng_kind == "byte":
        frames = np.frombuffer(raw, dtype=np.uint8).reshape(t, h, w, c).copy()
    else:
        frames = np.frombuffer(raw, dtype="<f8").reshape(t, h, w, c).astype(np.float64)
    try:
        return VideoClip(frames, rng_kind, fps)
    except (DataError, ShapeError) as exc:
        raise DataError(f"{path}: {exc}") from exc
