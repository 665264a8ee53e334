"""Monte Carlo simulator and analysis toolkit for phase-sensitive
intensity interferometry: a thermal source split onto two detectors, each
mixed with a weak coherent local oscillator so that intensity
cross-correlations carry both the magnitude and the phase of the source's
first-order coherence."""

from .errors import (
    AnalysisError,
    ConfigError,
    GridError,
    HbtSimError,
    ParamError,
    SamplingError,
)
from .fields import (
    CoherentLOSpec,
    ComplexEnvelope,
    PhaseScanSpec,
    PulseTrain,
    ThermalFieldSpec,
    gamma_reference,
    gen_coherent_lo,
    gen_cw_phase_diffused,
    gen_cw_thermal,
    gen_pulsed_thermal,
)
from .bench import BeamSplitterOut, attenuate, delay, mix, phase_shift, split
from .detection import (
    ClickRecord,
    CorrelationEstimate,
    DetectorSpec,
    PhotocurrentTrace,
    coincide,
    correlate_photocurrents,
    detect_analog,
    detect_spd,
    g2_at_lag,
)
from .analysis import (
    CoherenceFunction,
    CrosscheckReport,
    DopplerEstimate,
    FringeFit,
    FringeScan,
    GammaInversion,
    crosscheck,
    extract_phase_curve,
    fit_doppler,
    fit_fringe,
    gamma_from_g2,
    visibility_to_gamma,
)
from .oracle import (
    AntibunchedLOParams,
    CwScenarioParams,
    PulsedScenarioParams,
    ZetaReport,
    gamma22_antibunched,
    gamma22_cw,
    rate_pulsed,
    signal_rate_zeta,
    visibility_cw,
    visibility_pulsed,
    xi_factor,
)
from .config import ScenarioConfig, config_from_dict, load_config, validate_config
from .scenarios import (
    CheckRow,
    RunReport,
    run_cw_scenario,
    run_pulsed_scenario,
    run_sweep,
)

__version__ = "0.1.0"
