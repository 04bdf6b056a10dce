import numpy as np
import pytest

from signwave import TemplateDB, enroll
from signwave.sax import SaxParams
from signwave.signs import CANONICAL_SIGNS
from signwave.synth import ViewSpec, render_sign


@pytest.fixture(scope="session")
def canonical_images():
    return {s: render_sign(s, ViewSpec()) for s in CANONICAL_SIGNS}


@pytest.fixture(scope="session")
def canonical_db(canonical_images):
    db = TemplateDB(SaxParams())
    for sign, img in canonical_images.items():
        db = enroll(img, sign, db, azimuth=0.0, distance_m=3.0, altitude_m=5.0)
    return db


@pytest.fixture
def blank():
    return np.full((64, 64), 255, np.uint8)


def disc(radius=50, size=160):
    yy, xx = np.mgrid[:size, :size]
    c = (size - 1) / 2
    img = np.full((size, size), 255, np.uint8)
    img[(yy - c) ** 2 + (xx - c) ** 2 <= radius ** 2] = 0
    return img
