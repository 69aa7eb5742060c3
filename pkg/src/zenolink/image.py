# image.py
#
# End-to-end image transmission: binarize a grayscale raster, send every
# pixel as one counterfactual bit, and reassemble the received grayscale
# chart where the shade encodes the per-pixel success rate.

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .montecarlo import BitTrialResult, ImperfectionModel, RngStream, transmit_bit
from .protocol import BuiltProtocol


class DimensionMismatchError(ValueError):
    pass


@dataclass
class GrayImage:
    width: int
    height: int
    pixels: List[int]   # row-major, 0..255

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if len(self.pixels) != self.width * self.height:
            raise ValueError("pixel count does not match dimensions")
        for p in self.pixels:
            if not (0 <= p <= 255):
                raise ValueError("pixel values must be 8-bit")


@dataclass
class BitPlane:
    width: int
    height: int
    bits: List[int]

    def __post_init__(self):
        if len(self.bits) != self.width * self.height:
            raise ValueError("bit count does not match dimensions")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")


def binarize(img: GrayImage, threshold: int = 128) -> BitPlane:
    """Pixel >= threshold becomes bit 1, else bit 0."""
    if not (0 <= threshold <= 255):
        raise ValueError("threshold must be in [0, 255]")
    return BitPlane(
        width=img.width,
        height=img.height,
        bits=[1 if p >= threshold else 0 for p in img.pixels],
    )


@dataclass
class TransmissionJob:
    plane: BitPlane
    per_bit_s: float
    model: ImperfectionModel
    protocol: BuiltProtocol
    seed: RngStream          # pixel i uses seed.child(i): reproducible and
    slices: int = 16         # independent of processing order

    def __post_init__(self):
        if self.per_bit_s <= 0:
            raise ValueError("per-bit duration must be > 0")


NO_SIGNAL_GRAY = 128


def gray_level(d0_clicks: int, d1_clicks: int) -> int:
    """Linear gray map: only-D0 detections give 0, only-D1 give 255."""
    total = d0_clicks + d1_clicks
    if total == 0:
        raise ValueError("no signal detections")
    return round(255 * d1_clicks / total)


def transmit_image(
    job: TransmissionJob,
    progress: Optional[Callable[[int, int], None]] = None,
) -> Tuple[GrayImage, Dict]:
    """Transmit every pixel of the plane; return the received chart and metrics.

    Received gray per pixel is round(255 * D1 / (D0 + D1)): all-D0 clicks
    map to 0 and all-D1 clicks to 255.  Pixels with no signal detection are
    recorded as gray 128 and flagged rather than aborting the job.
    """
    plane = job.plane
    built = job.protocol
    n_px = len(plane.bits)
    grays: List[int] = [0] * n_px
    no_signal: List[int] = []
    errors = 0
    est_sum = [0.0, 0.0]
    est_n = [0, 0]

    d0, d1 = built.ports.d0, built.ports.d1
    for i, bit in enumerate(plane.bits):
        r: BitTrialResult = transmit_bit(
            built, bit, job.per_bit_s, job.model, job.seed.child(i), slices=job.slices
        )
        c0, c1 = r.counts[d0], r.counts[d1]
        if c0 + c1 == 0:
            grays[i] = NO_SIGNAL_GRAY
            no_signal.append(i)
        else:
            grays[i] = gray_level(c0, c1)
        if r.bit_decoded != bit:
            errors += 1   # NoSignal counts as an error
        if r.success_prob_estimate is not None:
            est_sum[bit] += r.success_prob_estimate
            est_n[bit] += 1
        if progress is not None:
            progress(i + 1, n_px)

    received = GrayImage(plane.width, plane.height, grays)
    metrics = {
        "pixels": n_px,
        "bit_errors": errors,
        "ber": errors / n_px,
        "no_signal_pixels": no_signal,
        "mean_success_bit0": est_sum[0] / est_n[0] if est_n[0] else None,
        "mean_success_bit1": est_sum[1] / est_n[1] if est_n[1] else None,
        "per_bit_s": job.per_bit_s,
        "simulated_time_s": n_px * job.per_bit_s,
    }
    return received, metrics


def error_report(
    sent: BitPlane, received: GrayImage, decode_threshold: int = 128
) -> Dict:
    """Compare a received grayscale chart against the sent bit plane.

    Decodes each received pixel as gray >= decode_threshold and reports the
    bit-error rate, per-class mean gray and a histogram of received grays.
    """
    if (sent.width, sent.height) != (received.width, received.height):
        raise DimensionMismatchError(
            f"sent {sent.width}x{sent.height} vs received {received.width}x{received.height}"
        )
    errors = 0
    gray_sum = [0, 0]
    class_n = [0, 0]
    hist: Dict[int, int] = {}
    for bit, gray in zip(sent.bits, received.pixels):
        decoded = 1 if gray >= decode_threshold else 0
        if decoded != bit:
            errors += 1
        gray_sum[bit] += gray
        class_n[bit] += 1
        hist[gray] = hist.get(gray, 0) + 1
    n = len(sent.bits)
    return {
        "pixels": n,
        "bit_errors": errors,
        "ber": errors / n,
        "mean_gray_bit0": gray_sum[0] / class_n[0] if class_n[0] else None,
        "mean_gray_bit1": gray_sum[1] / class_n[1] if class_n[1] else None,
        "gray_histogram": {str(k): hist[k] for k in sorted(hist)},
    }


def demo_logo(width: int = 50, height: int = 50) -> GrayImage:
    """Built-in test emblem: a bright ring with a diagonal bolt, on black.

    Deterministic, roughly one fifth bright pixels, so both bit classes get
    exercised in a transmission run.
    """
    cx, cy = (width - 1) / 2, (height - 1) / 2
    r_out = 0.46 * min(width, height)
    r_in = 0.36 * min(width, height)
    px: List[int] = []
    for y in range(height):
        for x in range(width):
            dx, dy = x - cx, y - cy
            rr = (dx * dx + dy * dy) ** 0.5
            on = r_in <= rr <= r_out
            # diagonal bolt through the middle
            if abs(dx + dy) < 0.08 * (width + height) and rr < r_in:
                on = True
            px.append(255 if on else 0)
    return GrayImage(width, height, px)
