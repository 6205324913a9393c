"""Exact Arakelov-style computations over finite adelic curves on the rationals."""
from .logscalar import LogScalar, log_factorial
from .curve import AdelicCurve, Place, log_abs, product_formula_defect, standard_rational_curve, trivial_curve
from .norms import DiagonalNorm, HERMITIAN, ULTRAMETRIC
from .bundles import RFiltration, SplitAdelicBundle, hn_filtration
from .sequences import VolumeReport

__version__ = "0.1.0"
