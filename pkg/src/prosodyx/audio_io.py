"""WAV reading/writing, resampling and down-mixing.

Only RIFF/WAVE with PCM-16 (format 1) or IEEE float-32 (format 3) is
accepted on input; output is always PCM-16 mono.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import IoFailure, MalformedHeader, MissingFile, UnsupportedEncoding

CANONICAL_RATE = 16000
RESAMPLE_ZERO_CROSSINGS = 16

_FORMAT_PCM = 1
_FORMAT_FLOAT = 3
_FORMAT_EXTENSIBLE = 0xFFFE


@dataclass
class AudioBuffer:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("AudioBuffer holds mono samples; use to_mono first")
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        self.sample_rate = int(self.sample_rate)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


def _parse_chunks(data: bytes, path) -> tuple[dict, bytes]:
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt = None
    payload = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack("<I", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise MalformedHeader(
                f"{path}: chunk {cid!r} declares {size} bytes, only {len(body)} present")
        if cid == b"fmt ":
            if size < 16:
                raise MalformedHeader(f"{path}: fmt chunk too small")
            tag, channels, rate, _, block_align, bits = struct.unpack("<HHIIHH", body[:16])
            if tag == _FORMAT_EXTENSIBLE and size >= 40:
                (tag,) = struct.unpack("<H", body[24:26])
            fmt = dict(tag=tag, channels=channels, rate=rate,
                       block_align=block_align, bits=bits)
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise MalformedHeader(f"{path}: missing fmt chunk")
    if payload is None:
        raise MalformedHeader(f"{path}: missing data chunk")
    return fmt, payload


def read_wav(path) -> AudioBuffer:
    """Read a PCM-16 or float-32 WAV file, down-mixing stereo to mono."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, "rb") as fh:
        data = fh.read()
    fmt, payload = _parse_chunks(data, path)

    channels = fmt["channels"]
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {channels} channels (only 1 or 2 supported)")
    if fmt["rate"] <= 0:
        raise MalformedHeader(f"{path}: sample rate {fmt['rate']}")
    if fmt["tag"] == _FORMAT_PCM and fmt["bits"] == 16:
        dtype, scale = np.dtype("<i2"), 1.0 / 32768.0
    elif fmt["tag"] == _FORMAT_FLOAT and fmt["bits"] == 32:
        dtype, scale = np.dtype("<f4"), 1.0
    else:
        raise UnsupportedEncoding(
            f"{path}: format tag {fmt['tag']} with {fmt['bits']} bits per sample")

    frame_bytes = dtype.itemsize * channels
    if len(payload) % frame_bytes:
        raise MalformedHeader(f"{path}: data chunk is not a whole number of frames")
    raw = np.frombuffer(payload, dtype=dtype).astype(np.float64) * scale
    if dtype.kind == "f":
        if not np.all(np.isfinite(raw)) or np.any(np.abs(raw) > 1.0):
            raise UnsupportedEncoding(f"{path}: float samples outside [-1, 1]")
    raw = raw.reshape(-1, channels)
    return to_mono(raw, fmt["rate"])


def write_wav(path, audio: AudioBuffer) -> None:
    """Write ``audio`` as 16-bit PCM mono, hard-clipping to full scale."""
    if len(audio) == 0:
        raise ValueError("cannot write an empty buffer")
    ints = np.clip(np.round(audio.samples * 32768.0), -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, _FORMAT_PCM, 1, audio.sample_rate,
                                    audio.sample_rate * 2, 2, 16)
    header += b"data" + struct.pack("<I", len(payload))
    try:
        with open(os.fspath(path), "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def to_mono(samples, sample_rate: int) -> AudioBuffer:
    """Average the channels of a ``(frames, channels)`` array.

    A 1-D array is taken as already mono.
    """
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim == 1:
        return AudioBuffer(arr.copy(), sample_rate)
    if arr.ndim != 2 or arr.shape[1] not in (1, 2):
        raise ValueError(f"expected 1 or 2 channels, got array of shape {arr.shape}")
    if arr.shape[1] == 1:
        return AudioBuffer(arr[:, 0].copy(), sample_rate)
    return AudioBuffer(0.5 * (arr[:, 0] + arr[:, 1]), sample_rate)


def resample(audio: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Hann-windowed sinc interpolation to ``target_rate``.

    Output length is ``round(len * target / source)``. When downsampling the
    kernel is stretched so its cutoff sits at the new Nyquist frequency.
    """
    target_rate = int(target_rate)
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate == audio.sample_rate:
        return AudioBuffer(audio.samples.copy(), target_rate)
    n_out = int(round(len(audio) * target_rate / audio.sample_rate))
    step = audio.sample_rate / target_rate
    cutoff = min(1.0, target_rate / audio.sample_rate)
    half_width = RESAMPLE_ZERO_CROSSINGS / 2 / cutoff
    out = _kernels.sinc_resample(np.ascontiguousarray(audio.samples), step, n_out,
                                 half_width, cutoff)
    return AudioBuffer(out, target_rate)


def load_canonical(path, rate: int = CANONICAL_RATE) -> AudioBuffer:
    """Read a WAV and bring it to the analysis rate."""
    audio = read_wav(path)
    if audio.sample_rate != rate:
        audio = resample(audio, rate)
    return audio
