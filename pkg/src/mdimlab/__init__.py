"""mdimlab: numerical laboratory for metric mean dimension of interval maps.

Subpackages follow the pipeline: parameter sequences (:mod:`mdimlab.params`),
the horseshoe family and its closed forms (:mod:`mdimlab.horseshoe`),
sampled counting under Bowen metrics (:mod:`mdimlab.metric_engine`),
fractal dimension estimators (:mod:`mdimlab.fractal_dims`), certified
transition-matrix bounds (:mod:`mdimlab.transition_spectral`), and exact
orbit-tube volume brackets (:mod:`mdimlab.orbit_tube`).

The hot counting kernels run from a compiled extension when available and
fall back to numpy otherwise; :func:`mdimlab.kernels.backend_name` reports
which one is active.
"""

from .kernels import backend_name
from .params import ParameterSpec, spec_from_config
from .horseshoe import HorseshoeMap, zigzag

__version__ = "0.1.0"

__all__ = [
    "HorseshoeMap",
    "ParameterSpec",
    "backend_name",
    "spec_from_config",
    "zigzag",
    "__version__",
]
