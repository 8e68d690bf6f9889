"""tsinvest: time-series classifiers for sourcing VC/GC investment targets.

Subpackages: numerics (autodiff kernels), data (schema + preprocessing),
synthetic (data generator), models (four architectures), training,
evaluation, portfolio (Monte-Carlo simulation), cli.
"""

__version__ = "0.1.0"
