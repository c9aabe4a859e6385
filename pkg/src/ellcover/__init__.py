"""Continuous ellipsoid covers of R^n, the quasi-distances they induce, and
Monte Carlo certification of their geometric properties."""
from ._accel import NUMBA_ENABLED
from .certify import ahlfors_certify, ball_volume_mc, triangle_constant
from .characterization import (
    ConstantLedger,
    XiCover,
    build_xi_cover,
    derive_constants,
    inner_property_check,
    inscribed_centered_ellipsoid,
    quasi_convexity_certify,
    roundtrip_equivalence,
)
from .covers import (
    Cover,
    CoverParams,
    DiagonalCover,
    IsotropicCover,
    NSWCover,
    ShapeConstants,
    Theta0Cover,
    make_cover,
    shape_constants_convert,
)
from .errors import ConfigError, ContractError, NumericError, ScaleRangeError, UnboundedBallError
from .geometry import (
    Ellipsoid,
    check_reverse_inclusion,
    contains_ellipsoid,
    contains_point,
    diag_reduce,
    dilate,
    intersects,
    random_ellipsoid,
    volume,
)
from .metrics import QuasiDistance, make_metric, rho_induced, rho_nsw, rho_one_sided, rho_theta0
from .numeric import bisect_monotone, norm_extrema_on_ball, solve_power_sum, spectral_norm, sym_eig
from .report import CertReport
from .streams import SeededRng
from .validators import (
    engulf_constant,
    union_engulf,
    validate_shape_geometric,
    validate_shape_norm,
    validate_volume,
)


def cover_eval(cover: Cover, x, t) -> Ellipsoid:
    """The ellipsoid theta(x, t) of ``cover``."""
    return cover.eval(x, t)


def theta0_cover() -> Theta0Cover:
    return Theta0Cover()


def nsw_cover(k: int) -> NSWCover:
    return NSWCover(k)


def diagonal_cover(exponents) -> DiagonalCover:
    return DiagonalCover(exponents)


__version__ = "0.1.0"
