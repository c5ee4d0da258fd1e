"""
Potentials v on the two branches of T and their JSON construction.

Three kinds are supported: the log-derivative family v = -q log|T'| + shift
(so v(0) = shift), a constant v0, and custom callables loaded by dotted path
with signature func(branch, x) -> v.
"""
import logging
from dataclasses import dataclass, field
from numbers import Real
from typing import Callable, Optional

from django.utils.module_loading import import_string

from interval_maps.exceptions import DomainError

from .constants import POTENTIAL_ALIASES, POTENTIAL_CONST, POTENTIAL_CUSTOM, POTENTIAL_MQL

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """A real potential, smooth up to the endpoints of [0, a] and [a, 1]"""
    kind: str
    q: float = 0.0
    # shift for mql, the constant for const, declared v(0) for custom
    v0: float = 0.0
    smoothness_k: int = 3
    func: Optional[Callable] = None
    params: dict = field(default_factory=dict)

    @property
    def v0_at_zero(self):
        return self.v0

    @classmethod
    def minus_q_log_derivative(cls, q, shift=0.0, smoothness_k=3):
        return cls(kind=POTENTIAL_MQL, q=_real(q, 'q'), v0=_real(shift, 'shift'), smoothness_k=smoothness_k)

    @classmethod
    def constant(cls, v0, smoothness_k=3):
        return cls(kind=POTENTIAL_CONST, v0=_real(v0, 'v0'), smoothness_k=smoothness_k)

    def describe(self):
        data = {'kind': self.kind, 'v0_at_zero': self.v0, 'smoothness_k': self.smoothness_k}
        if self.kind == POTENTIAL_MQL:
            data['q'] = self.q
        if self.kind == POTENTIAL_CUSTOM:
            data['callable'] = self.params.get('callable')
        return data


def _real(value, name):
    if not isinstance(value, Real):
        raise DomainError(f'Potential parameter {name} must be real, got {value!r}')
    return float(value)


def potential_from_config(data):
    """
    Construct a PotentialSpec from its JSON object

    Args:
        data: {"kind": "mql", "q": 1.0, "shift": 0.0} | {"kind": "const", "v0": -1.0}
            | {"kind": "custom", "callable": "package.module:func", "v0_at_zero": ...}

    Returns:
        PotentialSpec
    """
    kind = POTENTIAL_ALIASES.get(str(data.get('kind', '')).lower())
    if kind is None:
        raise DomainError(f'Unknown potential kind {data.get("kind")!r}')
    smoothness_k = int(data.get('k', 3))

    if kind == POTENTIAL_MQL:
        pot = PotentialSpec.minus_q_log_derivative(
            data.get('q', 1.0), shift=data.get('shift', data.get('v0', 0.0)), smoothness_k=smoothness_k,
        )
    elif kind == POTENTIAL_CONST:
        if 'v0' not in data:
            raise DomainError("Constant potentials need 'v0'")
        pot = PotentialSpec.constant(data['v0'], smoothness_k=smoothness_k)
    else:
        path = data.get('callable')
        if not path:
            raise DomainError("Custom potentials need a 'callable' dotted path")
        try:
            func = import_string(path.replace(':', '.'))
        except ImportError as exc:
            raise DomainError(f'Cannot import custom potential {path!r}: {exc}')
        v0 = data.get('v0_at_zero')
        if v0 is None:
            v0 = float(func(0, 0.0))
        pot = PotentialSpec(
            kind=POTENTIAL_CUSTOM, v0=_real(v0, 'v0_at_zero'), smoothness_k=smoothness_k,
            func=func, params=dict(data),
        )

    if pot.v0_at_zero > 0:
        logger.warning(f'v(0) = {pot.v0_at_zero} > 0: the branch weights cannot be summable')
    return pot
