"""Numerical laboratory for Weingarten hypersurfaces in space forms and warped
products: higher-order mean curvatures, integral identities, stability
constants and anisotropic analogues."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    CurvlabError,
    DataError,
    DomainError,
    GeometryError,
    NumericError,
    PreconditionError,
)
from .ambient import SpaceForm, WarpedProduct, cosh_warping  # noqa: E402
from .hypersurface import RadialGraph  # noqa: E402
from .symfun import elementary_symmetric, estimate_cn, normalized_hr  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "CurvlabError",
    "DataError",
    "DomainError",
    "GeometryError",
    "NumericError",
    "PreconditionError",
    "SpaceForm",
    "WarpedProduct",
    "cosh_warping",
    "RadialGraph",
    "elementary_symmetric",
    "estimate_cn",
    "normalized_hr",
]
