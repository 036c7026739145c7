"""Multi-satellite cooperative downlink simulator.

Library and command line tool for studying hybrid (analog + digital)
beamforming and user scheduling in LEO constellations that serve ground
users cooperatively on a shared band.
"""

__version__ = "0.1.0"

from .beamforming import (AnalogBeamVector, Codebook, DigitalMatrix,
                          HybridMatrix, analog_beamform, analog_power_scale,
                          build_codebook, generalized_channel, hybrid_beamform,
                          hybrid_combine, regularized_zf)
from .channel import (ArrayConfig, AttenuationConfig, ChannelVector,
                      LinkInvalidError, PathLossBreakdown, RfConfig,
                      SmallScaleConfig, channel_vector, path_loss,
                      small_scale, steering_vector, vsat_gain_dbi)
from .config import (ConfigError, EpochGrid, ScenarioConfig, bundled_cities,
                     config_digest, load_config)
from .geometry import (ConstellationConfig, GroundUser, LinkGeometry,
                       SatelliteState, VisibilitySets, link_geometry,
                       propagate, visibility)
from .harness import RunReport, build_epoch_instance, emit, run
from .metrics import (DensityClass, ExperimentResult, UserMetrics,
                      density_classes, total_se, user_metrics)
from .network import EpochInstance, SatelliteBeams
from .scheduling import (LinkMatrix, ScheduleResult, SchemeMode,
                         exhaustive_schedule, greedy_schedule)

__all__ = [
    "__version__",
    # geometry
    "ConstellationConfig", "GroundUser", "LinkGeometry", "SatelliteState",
    "VisibilitySets", "propagate", "link_geometry", "visibility",
    # channel
    "ArrayConfig", "AttenuationConfig", "ChannelVector", "LinkInvalidError",
    "PathLossBreakdown", "RfConfig", "SmallScaleConfig", "channel_vector",
    "path_loss", "small_scale", "steering_vector", "vsat_gain_dbi",
    # beamforming
    "AnalogBeamVector", "Codebook", "DigitalMatrix", "HybridMatrix",
    "analog_beamform", "analog_power_scale", "build_codebook",
    "generalized_channel", "hybrid_beamform", "hybrid_combine",
    "regularized_zf",
    # network / scheduling / metrics
    "EpochInstance", "SatelliteBeams", "LinkMatrix", "ScheduleResult",
    "SchemeMode", "greedy_schedule", "exhaustive_schedule",
    "DensityClass", "ExperimentResult", "UserMetrics", "density_classes",
    "total_se", "user_metrics",
    # harness / config
    "ConfigError", "EpochGrid", "ScenarioConfig", "RunReport",
    "bundled_cities", "config_digest", "load_config",
    "build_epoch_instance", "emit", "run",
]
