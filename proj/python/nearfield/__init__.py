"""Near-field XL-MIMO channel estimation: polar-domain dictionaries, P-SOMP and P-SIGW."""

from ._nearfield import (
    ArrayGeometry,
    ConfigError,
    ExperimentConfig,
    PathParam,
    PolarDictionary,
    build_polar_dictionary,
    coherence_exact,
    coherence_plot,
    element_distance,
    estimate,
    far_steering,
    fresnel,
    fresnel_validity_bound,
    g_magnitude,
    known_methods,
    make_config,
    near_steering,
    nmse,
    rayleigh_distance,
    run_campaign,
    run_point,
    synthesize_channel,
    uniform_dictionary,
)

__all__ = [name for name in dir() if not name.startswith("_")]
