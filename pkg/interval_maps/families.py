"""
Built-in parabolic map families and JSON construction of MapSpec objects.

Branch evaluators are written with plain operators so the same callable runs
on floats, numpy arrays and Jets. Powers are always taken of x itself
(x**(1+alpha) rather than x*x**alpha) so jets at x=0 keep the derivatives
that exist there.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

from django.utils.module_loading import import_string

from .constants import (
    FAMILY_ALIASES, FAMILY_CUSTOM, FAMILY_FAREY, FAMILY_LSV, FAMILY_PM, PM_PARTITION_TOL,
)
from .exceptions import DomainError
from .roots import solve_monotone

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MapSpec:
    """A two-branch full-branch map with an indifferent fixed point at 0"""
    family: str
    alpha: float
    a: float
    rho: float
    epsilon: float
    smoothness_r: float
    branches: Tuple[Callable, Callable]
    branch_derivatives: Tuple[Optional[Callable], Optional[Callable]] = (None, None)
    inverses: Tuple[Optional[Callable], Optional[Callable]] = (None, None)
    # Closed form of phi_l(x) when the family has one: callable(ell, x)
    induced_branch: Optional[Callable] = None
    # |phi_beta'| <= induced_constant * induced_rho**(-m)
    induced_rho: float = 2.0
    induced_constant: float = 1.0
    # uniform expansion is checked on [epsilon, a) U (a, expansion_hi]
    expansion_hi: float = 1.0
    params: dict = field(default_factory=dict)

    def branch_domain(self, branch):
        return (0.0, self.a) if branch == 0 else (self.a, 1.0)

    @property
    def is_mobius_gauss(self):
        """True when phi_l(x) = 1/(l+x) (Farey, whose jump transformation is the Gauss map)"""
        return self.family == FAMILY_FAREY


# --- Farey --------------------------------------------------------------

def _farey_t0(x):
    return x / (1 - x)


def _farey_t1(x):
    return (1 - x) / x


def _farey_dt0(x):
    return 1.0 / (1.0 - x) ** 2


def _farey_dt1(x):
    return -1.0 / x ** 2


def _farey_psi0(y):
    return y / (1 + y)


def _farey_psi1(y):
    return 1 / (1 + y)


def _gauss_branch(ell, x):
    return 1 / (ell + x)


def farey_map():
    """Farey map; its jump transformation is the Gauss map"""
    # |T1'| -> 1 at x=1, so expansion is declared on (a, 0.9] only
    return MapSpec(
        family=FAMILY_FAREY,
        alpha=1.0,
        a=0.5,
        rho=1.0 / 0.81,
        epsilon=0.1,
        smoothness_r=math.inf,
        branches=(_farey_t0, _farey_t1),
        branch_derivatives=(_farey_dt0, _farey_dt1),
        inverses=(_farey_psi0, _farey_psi1),
        induced_branch=_gauss_branch,
        induced_rho=2.0,
        induced_constant=2.0,
        expansion_hi=0.9,
        params={},
    )


# --- Liverani-Saussol-Vaienti -------------------------------------------

class _LSVBranches:
    def __init__(self, alpha):
        self.alpha = alpha
        self.coefficient = 2.0 ** alpha

    def t0(self, x):
        return x + self.coefficient * x ** (1 + self.alpha)

    def t1(self, x):
        return 2 * x - 1

    def dt0(self, x):
        return 1.0 + (1 + self.alpha) * self.coefficient * x ** self.alpha

    def dt1(self, x):
        return 2.0 + 0.0 * x

    def psi1(self, y):
        return (y + 1) / 2


def _smoothness_for(alpha):
    return math.inf if float(alpha).is_integer() else float(math.floor(1 + alpha))


def lsv_map(alpha):
    if alpha <= 0:
        raise DomainError(f'LSV exponent must be positive, got {alpha}')
    b = _LSVBranches(alpha)
    epsilon = 0.25
    rho = min(2.0, 1.0 + (1 + alpha) * 2.0 ** (-alpha))
    return MapSpec(
        family=FAMILY_LSV,
        alpha=float(alpha),
        a=0.5,
        rho=rho,
        epsilon=epsilon,
        smoothness_r=_smoothness_for(alpha),
        branches=(b.t0, b.t1),
        branch_derivatives=(b.dt0, b.dt1),
        inverses=(None, b.psi1),
        induced_rho=2.0,
        induced_constant=1.0,
        params={'alpha': alpha},
    )


# --- Pomeau-Manneville --------------------------------------------------

class _PMBranches:
    def __init__(self, alpha):
        self.alpha = alpha

    def t0(self, x):
        return x + x ** (1 + self.alpha)

    def t1(self, x):
        return x + x ** (1 + self.alpha) - 1

    def dt(self, x):
        return 1.0 + (1 + self.alpha) * x ** self.alpha


def pm_map(alpha):
    if alpha <= 0:
        raise DomainError(f'Pomeau-Manneville exponent must be positive, got {alpha}')
    b = _PMBranches(alpha)
    # a + a^(1+alpha) = 1 defines the partition point of x + x^(1+alpha) mod 1
    a = solve_monotone(b.t0, 1.0, 0.0, 1.0, tol=PM_PARTITION_TOL, derivative=b.dt)
    epsilon = a / 2
    return MapSpec(
        family=FAMILY_PM,
        alpha=float(alpha),
        a=a,
        rho=1.0 + (1 + alpha) * epsilon ** alpha,
        epsilon=epsilon,
        smoothness_r=_smoothness_for(alpha),
        branches=(b.t0, b.t1),
        branch_derivatives=(b.dt, b.dt),
        inverses=(None, None),
        induced_rho=1.0 + (1 + alpha) * a ** alpha,
        induced_constant=1.0,
        params={'alpha': alpha},
    )


# --- custom branch pairs ------------------------------------------------

def _load_callable(path):
    return import_string(path.replace(':', '.'))


def custom_map(params):
    """
    Build a MapSpec from a factory loaded by dotted path

    Args:
        params: dict with 'factory' ("package.module:callable") returning a dict
            with 'branches' (T0, T1) and optionally 'derivatives', 'inverses',
            'induced_branch'; plus declared 'alpha', 'a', 'rho', 'epsilon'.

    Returns:
        MapSpec with family 'custom'
    """
    try:
        factory = _load_callable(params['factory'])
    except KeyError:
        raise DomainError("Custom maps need a 'factory' dotted path")
    except ImportError as exc:
        raise DomainError(f"Cannot import custom map factory {params['factory']!r}: {exc}")

    parts = factory(**params.get('factory_kwargs', {}))
    missing = [name for name in ('alpha', 'a', 'rho', 'epsilon') if name not in params]
    if missing:
        raise DomainError(f'Custom map is missing declared parameters: {", ".join(missing)}')

    return MapSpec(
        family=FAMILY_CUSTOM,
        alpha=float(params['alpha']),
        a=float(params['a']),
        rho=float(params['rho']),
        epsilon=float(params['epsilon']),
        smoothness_r=float(params.get('smoothness_r', math.inf)),
        branches=tuple(parts['branches']),
        branch_derivatives=tuple(parts.get('derivatives', (None, None))),
        inverses=tuple(parts.get('inverses', (None, None))),
        induced_branch=parts.get('induced_branch'),
        induced_rho=float(params.get('induced_rho', params['rho'])),
        induced_constant=float(params.get('induced_constant', 1.0)),
        expansion_hi=float(params.get('expansion_hi', 1.0)),
        params=dict(params),
    )


def map_from_config(data):
    """
    Construct a MapSpec from its JSON object

    Args:
        data: {"family": "farey"|"lsv"|"pm"|"custom", "alpha": ..., "params": {...}}

    Returns:
        MapSpec
    """
    family_key = str(data.get('family', '')).lower()
    family = FAMILY_ALIASES.get(family_key)
    if family is None:
        raise DomainError(f'Unknown map family {data.get("family")!r}')

    params = dict(data.get('params') or {})
    alpha = data.get('alpha', params.get('alpha'))

    if family == FAMILY_FAREY:
        if alpha not in (None, 1, 1.0):
            raise DomainError(f'The Farey map has alpha=1, got {alpha}')
        spec = farey_map()
    elif family == FAMILY_LSV:
        spec = lsv_map(float(alpha if alpha is not None else 1.0))
    elif family == FAMILY_PM:
        spec = pm_map(float(alpha if alpha is not None else 1.0))
    else:
        if alpha is not None:
            params.setdefault('alpha', alpha)
        spec = custom_map(params)

    logger.debug(f'Built {spec.family} map: alpha={spec.alpha}, a={spec.a:.15g}, rho={spec.rho:.6g}')
    return spec
