"""Satellite-to-ground MISO channel model.

A channel vector is the product of a scalar large-scale amplitude
(free-space loss, shadow fading, gaseous absorption, scintillation,
antenna gains, noise normalization) and a small-scale fading vector
built from planar-array steering vectors: a log-normal direct path
plus Rayleigh diffuse rays (Loo model).

The noise power is folded into the large-scale amplitude, so all
downstream SINR math uses unit noise power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299792458.0
BOLTZMANN_J_K = 1.380649e-23

# Gain-beamwidth constant of a parabolic aperture: G ~ 30000 / theta_3dB^2
# with theta in degrees.
_APERTURE_GAIN_CONST = 30000.0


class LinkInvalidError(ValueError):
    """Raised when a link cannot physically exist (satellite below horizon)."""


@dataclass(frozen=True)
class RfConfig:
    """Radio front-end parameters of the downlink."""

    carrier_frequency_hz: float = 20e9
    bandwidth_hz: float = 400e6
    noise_temperature_dbk: float = 24.0
    satellite_antenna_gain_dbi: float = 21.5
    vsat_max_gain_dbi: float = 40.0
    tx_power_w: float = 80.0
    vsat_floor_suppression_db: float = 30.0

    def __post_init__(self) -> None:
        for name in ("carrier_frequency_hz", "bandwidth_hz", "tx_power_w"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be > 0")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.carrier_frequency_hz

    @property
    def noise_power_w(self) -> float:
        """k * T * B with the noise temperature given in dBK."""
        t_kelvin = 10.0 ** (self.noise_temperature_dbk / 10.0)
        return BOLTZMANN_J_K * t_kelvin * self.bandwidth_hz

    @property
    def vsat_theta_3db_deg(self) -> float:
        """Half-power angle: the aperture relation gives the full 3 dB
        beamwidth, the gain is 3 dB down at half of it."""
        g_lin = 10.0 ** (self.vsat_max_gain_dbi / 10.0)
        return 0.5 * math.sqrt(_APERTURE_GAIN_CONST / g_lin)


@dataclass(frozen=True)
class ArrayConfig:
    """Planar array layout: a grid of sub-arrays, each one an n_x-by-n_y
    element grid driven by a single RF chain (one spot beam each)."""

    n_sub_x: int = 8
    n_sub_y: int = 4
    n_x: int = 8
    n_y: int = 8
    element_spacing: float = 0.5  # in wavelengths

    def __post_init__(self) -> None:
        if self.n_x < 1 or self.n_y < 1 or self.n_sub_x < 1 or self.n_sub_y < 1:
            raise ValueError("array dimensions must be >= 1")
        if self.element_spacing <= 0.0:
            raise ValueError("element_spacing must be > 0")

    @property
    def n_elements(self) -> int:
        return self.n_x * self.n_y

    @property
    def n_beams(self) -> int:
        return self.n_sub_x * self.n_sub_y


@dataclass(frozen=True)
class SmallScaleConfig:
    """Loo fading: direct-path amplitude log-normal (parameters in dB),
    diffuse rays Rayleigh with total mean power ``multipath_power_db``
    relative to an unfaded direct path.  Use ``-inf`` to disable the
    diffuse part."""

    n_clusters: int = 2
    n_rays: int = 10
    direct_amp_mean_db: float = -0.5
    direct_amp_std_db: float = 1.0
    multipath_power_db: float = -15.0
    angle_spread_deg: float = 2.0

    def __post_init__(self) -> None:
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("cluster/ray counts must be >= 1")

    @property
    def direct_mean_square(self) -> float:
        """E[|m0|^2] for 20*log10|m0| ~ N(mean, std^2)."""
        c = math.log(10.0) / 10.0
        return math.exp(c * self.direct_amp_mean_db
                        + 0.5 * (c * self.direct_amp_std_db) ** 2)

    @property
    def multipath_power(self) -> float:
        return 10.0 ** (self.multipath_power_db / 10.0)

    @property
    def normalization(self) -> float:
        """Scale factor making the mean small-scale energy exactly one."""
        return 1.0 / math.sqrt(self.direct_mean_square + self.multipath_power)


@dataclass(frozen=True)
class AttenuationConfig:
    """Clear-sky attenuation terms and shadow-fading spread (all dB)."""

    zenith_gas_db: float = 0.5
    scintillation_db: float = 0.3
    shadow_sigma_db: float = 1.2

    def __post_init__(self) -> None:
        if self.zenith_gas_db < 0 or self.scintillation_db < 0 or self.shadow_sigma_db < 0:
            raise ValueError("attenuation terms must be >= 0")


@dataclass(frozen=True)
class PathLossBreakdown:
    basic_db: float
    gas_db: float
    scintillation_db: float

    @property
    def total_db(self) -> float:
        return self.basic_db + self.gas_db + self.scintillation_db


@dataclass(frozen=True, eq=False)
class ChannelVector:
    sat_id: int
    gu_id: int
    entries: np.ndarray  # (N,) complex


def steering_vector(phi_deg: float, theta_deg: float, array: ArrayConfig) -> np.ndarray:
    """Unit-norm planar-array steering vector for azimuth ``phi_deg`` and
    elevation ``theta_deg`` seen from the array.

    Element (p, q) maps to index p * n_y + q, matching the Kronecker
    order of the 2D DFT codebook.
    """
    phi = math.radians(phi_deg)
    theta = math.radians(theta_deg)
    kx = -2j * math.pi * array.element_spacing * math.cos(theta) * math.cos(phi)
    ky = -2j * math.pi * array.element_spacing * math.cos(theta) * math.sin(phi)
    ax = np.exp(kx * np.arange(array.n_x))
    ay = np.exp(ky * np.arange(array.n_y))
    return np.kron(ax, ay) / math.sqrt(array.n_elements)


def sample_ray_angles(phi0_deg: float, theta0_deg: float, cfg: SmallScaleConfig,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw (azimuth, elevation) pairs for every diffuse ray.

    Cluster centers and rays within a cluster are both Laplacian around
    the direct-path direction with scale ``angle_spread_deg``.
    """
    out = np.empty((cfg.n_clusters * cfg.n_rays, 2))
    b = cfg.angle_spread_deg
    i = 0
    for _ in range(cfg.n_clusters):
        center = rng.laplace(loc=(phi0_deg, theta0_deg), scale=b, size=2)
        for _ in range(cfg.n_rays):
            out[i] = rng.laplace(loc=center, scale=b, size=2)
            i += 1
    return out


def small_scale(phi0_deg: float, theta0_deg: float, ray_angles: np.ndarray,
                cfg: SmallScaleConfig, array: ArrayConfig,
                rng: np.random.Generator) -> np.ndarray:
    """Small-scale fading vector with mean energy one.

    Direct path: amplitude 10^(A/20), A ~ N(mean_db, std_db^2); diffuse
    rays: Rayleigh amplitudes sharing ``multipath_power`` equally; all
    phases uniform on [0, 2*pi).
    """
    amp0_db = rng.normal(cfg.direct_amp_mean_db, cfg.direct_amp_std_db)
    m0 = 10.0 ** (amp0_db / 20.0) * np.exp(2j * math.pi * rng.uniform())

    h = m0 * steering_vector(phi0_deg, theta0_deg, array)

    n_paths = cfg.n_clusters * cfg.n_rays
    if ray_angles.shape != (n_paths, 2):
        raise ValueError(f"expected {n_paths} ray angle pairs, got {ray_angles.shape}")
    per_ray_power = cfg.multipath_power / n_paths
    if per_ray_power > 0.0:
        amps = rng.rayleigh(scale=math.sqrt(per_ray_power / 2.0), size=n_paths)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=n_paths)
        for (phi, theta), m in zip(ray_angles, amps * np.exp(1j * phases)):
            h += m * steering_vector(phi, theta, array)
    return cfg.normalization * h


def path_loss(geom, rf: RfConfig, atten: AttenuationConfig,
              rng: np.random.Generator) -> PathLossBreakdown:
    """Large-scale path loss of a link: free-space plus a shadow-fading
    draw, cosecant-scaled gaseous absorption, and scintillation."""
    if geom.elevation_deg <= 0.0:
        raise LinkInvalidError(
            f"satellite below horizon (elevation {geom.elevation_deg:.2f} deg)")
    d_m = geom.slant_range_km * 1e3
    fspl = 20.0 * math.log10(4.0 * math.pi * d_m * rf.carrier_frequency_hz
                             / SPEED_OF_LIGHT_M_S)
    shadow = float(rng.normal(0.0, atten.shadow_sigma_db))
    gas = atten.zenith_gas_db / math.sin(math.radians(geom.elevation_deg))
    return PathLossBreakdown(basic_db=fspl + shadow, gas_db=gas,
                             scintillation_db=atten.scintillation_db)


def vsat_gain_dbi(off_boresight_deg: float, rf: RfConfig) -> float:
    """Narrow-beam user antenna gain versus off-boresight angle:
    quadratic roll-off (3 dB down at the half-power angle), floored
    ``vsat_floor_suppression_db`` below peak."""
    if off_boresight_deg < 0.0:
        raise ValueError("off_boresight_deg must be >= 0")
    rolloff = 3.0 * (off_boresight_deg / rf.vsat_theta_3db_deg) ** 2
    return rf.vsat_max_gain_dbi - min(rolloff, rf.vsat_floor_suppression_db)


def vsat_gain_linear(off_boresight_deg: float, rf: RfConfig) -> float:
    return 10.0 ** (vsat_gain_dbi(off_boresight_deg, rf) / 10.0)


def large_scale_amplitude(pl_total_db: float, rf: RfConfig,
                          vsat_gain_dbi_value: float) -> float:
    """Amplitude gain combining both antenna gains, the path loss and the
    noise normalization (resulting SINR math uses unit noise power)."""
    g_db = (rf.satellite_antenna_gain_dbi + vsat_gain_dbi_value - pl_total_db)
    return math.sqrt(10.0 ** (g_db / 10.0) / rf.noise_power_w)


def channel_vector(sat_id: int, gu_id: int, geom, rf: RfConfig,
                   array: ArrayConfig, sscfg: SmallScaleConfig,
                   atten: AttenuationConfig,
                   rng: np.random.Generator) -> ChannelVector:
    """Complete channel vector for one link: path loss and shadowing,
    user antenna gain at the link's off-boresight angle, and Loo fading.
    Draw order is fixed (shadowing, ray angles, fading coefficients) so a
    per-link substream yields reproducible channels."""
    pl = path_loss(geom, rf, atten, rng)
    rays = sample_ray_angles(geom.azimuth_sat_deg, geom.elevation_sat_deg, sscfg, rng)
    h_ss = small_scale(geom.azimuth_sat_deg, geom.elevation_sat_deg, rays,
                       sscfg, array, rng)
    amp = large_scale_amplitude(pl.total_db, rf,
                                vsat_gain_dbi(geom.off_boresight_deg, rf))
    return ChannelVector(sat_id=sat_id, gu_id=gu_id, entries=amp * h_ss)
