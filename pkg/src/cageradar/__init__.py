"""FMCW radar scene simulation and processing for in-cage rodent monitoring."""

from .config import (C_LIGHT, DerivedParams, RadarConfig, derive_params,
                     displacement_to_phase, if_frequency, load_config,
                     load_preset, phase_to_displacement, radome_spacing,
                     save_config)
from .errors import (CageRadarError, ConfigError, DspError, HarnessError,
                     SceneError, StreamError, TrackingError, VitalsError)
from .scene import (ClutterReflector, MicroMotion, RawFrame, Scene, Target,
                    breathing_motion, cardiac_motion, iter_frames, load_scene,
                    n_frames, occlude, save_scene, synthesize_frame)
from .dsp import (RafState, RangeDopplerMap, RangeProfile, mean_removal,
                  movement_power, raf_apply, range_doppler, range_fft,
                  range_power_profile)
from .vitals import (PhaseSeries, VitalsEstimate, chirp_accumulate,
                     extract_phase, hr_estimate, rr_estimate, select_target_bin)
from .tracking import (Peak, TrackEstimate, ZoneConfig, calibrate_thresholds,
                       classify_activity, classify_zone, detect_peaks,
                       estimate_range)
from .framestream import (decode_stream, encode_stream, read_stream,
                          write_stream)
from .pipeline import MovementPipeline, VitalsPipeline, run_pipeline
from .scenarios import get_scenario, scripted_scenarios

__version__ = "0.1.0"
