"""Media discovery, frame sampling, and face cropping."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
from PIL import Image

from .job import DETECTOR_HAAR, DETECTOR_NONE, ExportJob, JobError, is_valid_identifier

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}
VIDEO_EXTENSIONS = {".mp4", ".avi", ".mov", ".mkv", ".webm"}


@dataclass(frozen=True)
class Sample:
    """One face crop ready for inference, with its manifest identity."""

    sample_id: str
    video_id: str
    frame_index: int
    identity_id: str
    class_name: str
    pixels: np.ndarray  # (crop, crop, 3) float32 in [0, 1]


def _media_id(class_name: str, filename: str) -> str:
    stem = os.path.splitext(filename)[0]
    return f"{class_name}/{stem}"


def discover(job: ExportJob) -> List[Tuple[str, str]]:
    """List (class_name, file_path) pairs under the class-per-directory root."""
    if not os.path.isdir(job.input_root):
        raise JobError(f"input root {job.input_root!r} is not a directory")
    found: List[Tuple[str, str]] = []
    for class_name in job.class_names:
        class_dir = os.path.join(job.input_root, class_name)
        if not os.path.isdir(class_dir):
            continue
        for name in sorted(os.listdir(class_dir)):
            path = os.path.join(class_dir, name)
            ext = os.path.splitext(name)[1].lower()
            if not os.path.isfile(path) or ext not in IMAGE_EXTENSIONS | VIDEO_EXTENSIONS:
                continue
            if not is_valid_identifier(_media_id(class_name, name)):
                raise JobError(f"file name {name!r} is not a valid identifier")
            found.append((class_name, path))
    if not found:
        raise JobError(f"no media files found under {job.input_root!r}")
    return found


def _iter_frames(path: str, frame_rate: float) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (frame_index, RGB uint8 array) at roughly ``frame_rate`` per second."""
    ext = os.path.splitext(path)[1].lower()
    if ext in IMAGE_EXTENSIONS:
        with Image.open(path) as image:
            yield 0, np.asarray(image.convert("RGB"))
        return

    import cv2  # video decoding is an optional dependency

    capture = cv2.VideoCapture(path)
    if not capture.isOpened():
        raise JobError(f"cannot open video {path!r}")
    fps = capture.get(cv2.CAP_PROP_FPS) or 0.0
    step = max(1, round(fps / frame_rate)) if fps > 0 else 1
    index = 0
    while True:
        ok, frame = capture.read()
        if not ok:
            break
        if index % step == 0:
            yield index, cv2.cvtColor(frame, cv2.COLOR_BGR2RGB)
        index += 1
    capture.release()


_haar_cascade = None


def _detect_face(frame: np.ndarray, detector: str) -> Optional[Tuple[int, int, int, int]]:
    """Return the largest face box (x, y, w, h), or the full frame."""
    if detector == DETECTOR_NONE:
        return 0, 0, frame.shape[1], frame.shape[0]
    if detector == DETECTOR_HAAR:
        global _haar_cascade
        import cv2

        if _haar_cascade is None:
            path = os.path.join(cv2.data.haarcascades, "haarcascade_frontalface_default.xml")
            _haar_cascade = cv2.CascadeClassifier(path)
        gray = cv2.cvtColor(frame, cv2.COLOR_RGB2GRAY)
        faces = _haar_cascade.detectMultiScale(gray, scaleFactor=1.1, minNeighbors=4)
        if len(faces) == 0:
            return None
        return tuple(max(faces, key=lambda box: box[2] * box[3]))
    raise JobError(f"unknown detector {detector!r}")


def _crop(frame: np.ndarray, box: Tuple[int, int, int, int], size: int) -> np.ndarray:
    x, y, w, h = box
    face = Image.fromarray(frame[y : y + h, x : x + w])
    resized = face.resize((size, size), Image.BILINEAR)
    return np.asarray(resized, dtype=np.float32) / 255.0


def collect_samples(job: ExportJob) -> List[Sample]:
    """Sample, detect, and crop every input; frames without a face are skipped."""
    samples: List[Sample] = []
    for class_name, path in discover(job):
        video_id = _media_id(class_name, os.path.basename(path))
        for frame_index, frame in _iter_frames(path, job.frame_rate):
            box = _detect_face(frame, job.detector)
            if box is None:
                log.warning("no face found in %s frame %d; skipping", path, frame_index)
                continue
            samples.append(
                Sample(
                    sample_id=f"{video_id}/f{frame_index}",
                    video_id=video_id,
                    frame_index=frame_index,
                    identity_id=video_id,
                    class_name=class_name,
                    pixels=_crop(frame, box, job.crop_size),
                )
            )
    if not samples:
        raise JobError("no faces survived detection; nothing to export")
    return samples
