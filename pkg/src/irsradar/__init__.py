"""FMCW automotive radar detection under mutual interference with an onboard IRS."""

from .irs import (ActiveIrs, Custom, Geometry, IrsReturn, IrsSpec, Optimal, PassiveIrs, Uniform,
                  active_array_rcs, element_delay, element_positions, element_rcs, irs_return,
                  optimal_phases, passive_array_rcs)
from .params import (FmcwParams, WaveformMetrics, derive_waveform_metrics, physical_to_bin,
                     validate_scenario)
from .processing import (CaCfarDetector, CfarConfig, Detection, RangeDopplerMap,
                         RangeDopplerProcessor, bin_to_physical, ca_cfar_detect, range_doppler_map)
from .propagation import (BareRcs, InterfererSpec, TargetSpec, echo_power, interference_power,
                          irs_element_noise_power, receiver_noise_power)
from .synth import (BeatFrame, Scenario, compose_beat_frame, interference_beat_samples,
                    target_beat_samples, trial_seed)
from .experiments import (DetectorSettings, SweepResult, TrialOutcome, detection_probability_sweep,
                          rcs_curve, run_trial, sir_curve)

__version__ = "0.1.0"
