import numpy as np
import pytest

from coopsat.beamforming import analog_beamform, build_codebook
from coopsat.channel import ArrayConfig, RfConfig
from coopsat.network import EpochInstance


@pytest.fixture
def small_array():
    return ArrayConfig(n_x=4, n_y=4, n_sub_x=2, n_sub_y=1)


@pytest.fixture
def default_array():
    return ArrayConfig()


@pytest.fixture
def rf():
    return RfConfig()


def make_instance(rng, n_sats=3, n_gus=5, n_beams=2, array=None, rf_cfg=None,
                  channel_scale=3.0, visible=None):
    """Random synthetic scheduling instance with consistent channels,
    analog beams and user-to-satellite directions."""
    array = array or ArrayConfig(n_x=4, n_y=4, n_sub_x=2, n_sub_y=1)
    rf_cfg = rf_cfg or RfConfig()
    codebook = build_codebook(array)
    n = array.n_elements

    sat_ids = tuple(range(n_sats))
    gu_ids = tuple(range(100, 100 + n_gus))
    if visible is None:
        visible = {}
        for g in gu_ids:
            k = int(rng.integers(1, n_sats + 1))
            visible[g] = tuple(sorted(rng.choice(n_sats, size=k, replace=False).tolist()))
    base, beams, dirs = {}, {}, {}
    for g in gu_ids:
        for s in visible[g]:
            h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2 * n)
            base[(s, g)] = channel_scale * h
            beams[(s, g)] = analog_beamform(h, codebook, k=min(4, n)).entries
            d = rng.standard_normal(3)
            dirs[(g, s)] = d / np.linalg.norm(d)
    return EpochInstance(sat_ids=sat_ids, gu_ids=gu_ids, rf=rf_cfg,
                         n_beams=n_beams, visible=visible, base_channels=base,
                         analog_beams=beams, sat_directions=dirs)


@pytest.fixture
def instance_factory():
    return make_instance
