import pytest

from zenolink.image import (
    BitPlane,
    DimensionMismatchError,
    GrayImage,
    NO_SIGNAL_GRAY,
    TransmissionJob,
    binarize,
    demo_logo,
    error_report,
    gray_level,
    transmit_image,
)
from zenolink.montecarlo import ImperfectionModel, RngStream
from zenolink.protocol import build_protocol


@pytest.fixture(scope="module")
def built36():
    return build_protocol(3, 6)


# -- raster plumbing -------------------------------------------------------------

def test_gray_image_validation():
    with pytest.raises(ValueError):
        GrayImage(0, 3, [])
    with pytest.raises(ValueError):
        GrayImage(2, 2, [0, 0, 0])
    with pytest.raises(ValueError):
        GrayImage(1, 1, [256])
    with pytest.raises(ValueError):
        BitPlane(1, 2, [0, 2])


def test_binarize_threshold_semantics():
    img = GrayImage(4, 1, [0, 127, 128, 255])
    plane = binarize(img)
    assert plane.bits == [0, 0, 1, 1]
    assert binarize(img, threshold=0).bits == [1, 1, 1, 1]
    assert binarize(img, threshold=255).bits == [0, 0, 0, 1]
    with pytest.raises(ValueError):
        binarize(img, threshold=300)


def test_gray_level_endpoints():
    assert gray_level(10, 0) == 0
    assert gray_level(0, 10) == 255
    assert gray_level(1, 1) == 128
    assert gray_level(2, 1) == 85
    with pytest.raises(ValueError):
        gray_level(0, 0)


def test_demo_logo_is_deterministic_and_mixed():
    a = demo_logo(50, 50)
    b = demo_logo(50, 50)
    assert a.pixels == b.pixels
    assert set(a.pixels) == {0, 255}
    ones = sum(1 for p in a.pixels if p == 255)
    assert 0 < ones < len(a.pixels)


# -- error report ----------------------------------------------------------------

def test_error_report_exact_match():
    sent = BitPlane(2, 2, [0, 1, 1, 0])
    received = GrayImage(2, 2, [10, 240, 250, 5])
    rep = error_report(sent, received)
    assert rep["bit_errors"] == 0 and rep["ber"] == 0.0
    assert rep["mean_gray_bit0"] == pytest.approx(7.5)
    assert rep["mean_gray_bit1"] == pytest.approx(245.0)
    assert rep["gray_histogram"] == {"5": 1, "10": 1, "240": 1, "250": 1}


def test_error_report_single_flip():
    n = 50 * 50
    sent = BitPlane(50, 50, [0] * n)
    pixels = [0] * n
    pixels[1234] = 200  # decodes as 1
    rep = error_report(sent, GrayImage(50, 50, pixels))
    assert rep["bit_errors"] == 1
    assert rep["ber"] == pytest.approx(1 / n, abs=1e-12)
    assert rep["mean_gray_bit1"] is None


def test_error_report_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        error_report(BitPlane(2, 2, [0] * 4), GrayImage(2, 3, [0] * 6))


# -- transmission ------------------------------------------------------------------

def test_ideal_channel_transmits_without_errors(built36):
    plane = binarize(demo_logo(8, 8))
    job = TransmissionJob(
        plane=plane,
        per_bit_s=1e-3,
        model=ImperfectionModel.ideal(),
        protocol=built36,
        seed=RngStream(101, 0),
    )
    received, metrics = transmit_image(job)
    assert metrics["bit_errors"] == 0 and metrics["ber"] == 0.0
    assert metrics["no_signal_pixels"] == []
    assert metrics["pixels"] == 64
    assert metrics["simulated_time_s"] == pytest.approx(0.064)
    rep = error_report(plane, received)
    assert rep["bit_errors"] == 0
    # gray classes separate cleanly: ideal bit0 shades low, bit1 high
    assert rep["mean_gray_bit0"] < 100 < rep["mean_gray_bit1"]


def test_transmission_is_reproducible(built36):
    plane = binarize(demo_logo(6, 6))
    def run():
        job = TransmissionJob(
            plane=plane,
            per_bit_s=2e-3,
            model=ImperfectionModel(),
            protocol=built36,
            seed=RngStream(77, 0),
        )
        return transmit_image(job)
    img_a, met_a = run()
    img_b, met_b = run()
    assert img_a.pixels == img_b.pixels
    assert met_a == met_b


def test_no_signal_pixels_flagged_not_fatal(built36):
    plane = BitPlane(2, 2, [0, 1, 0, 1])
    job = TransmissionJob(
        plane=plane,
        per_bit_s=1.0,
        model=ImperfectionModel(source_rate=0.0, dark_rate=0.0),
        protocol=built36,
        seed=RngStream(5, 0),
    )
    received, metrics = transmit_image(job)
    assert received.pixels == [NO_SIGNAL_GRAY] * 4
    assert metrics["no_signal_pixels"] == [0, 1, 2, 3]
    assert metrics["bit_errors"] == 4  # NoSignal decodes as error
    assert metrics["mean_success_bit0"] is None
    assert metrics["mean_success_bit1"] is None


def test_progress_callback_sees_every_pixel(built36):
    plane = BitPlane(3, 1, [0, 1, 0])
    seen = []
    job = TransmissionJob(
        plane=plane,
        per_bit_s=1e-4,
        model=ImperfectionModel.ideal(),
        protocol=built36,
        seed=RngStream(9, 0),
    )
    transmit_image(job, progress=lambda done, total: seen.append((done, total)))
    assert seen == [(1, 3), (2, 3), (3, 3)]


def test_job_validation(built36):
    plane = BitPlane(1, 1, [0])
    with pytest.raises(ValueError):
        TransmissionJob(
            plane=plane,
            per_bit_s=0.0,
            model=ImperfectionModel(),
            protocol=built36,
            seed=RngStream(1, 0),
        )


def test_starved_budget_ber_falls_with_duration(built36):
    # same seed, rising per-bit photon budget: the dark-count floor loses
    # its grip and the error rate must fall strictly
    plane = binarize(demo_logo(20, 20))
    starved = ImperfectionModel(source_rate=1.9e6 / 100, dark_rate=300.0)

    def ber(per_bit_s):
        job = TransmissionJob(
            plane=plane,
            per_bit_s=per_bit_s,
            model=starved,
            protocol=built36,
            seed=RngStream(31, 0),
        )
        _, metrics = transmit_image(job)
        return metrics["ber"]

    b_short, b_mid, b_long = ber(0.02), ber(0.1), ber(0.5)
    assert b_short > b_mid > b_long
    assert b_short > 0.15
    assert b_long < 0.1
