"""
Potential kinds and summability estimate defaults
"""

POTENTIAL_MQL = 'mql'
POTENTIAL_CONST = 'const'
POTENTIAL_CUSTOM = 'custom'

POTENTIAL_CHOICES = [
    (POTENTIAL_MQL, 'v = -q log|T\'| + shift'),
    (POTENTIAL_CONST, 'Constant v0'),
    (POTENTIAL_CUSTOM, 'Custom callable'),
]

POTENTIAL_ALIASES = {
    'mql': POTENTIAL_MQL,
    'minus_q_log_dt': POTENTIAL_MQL,
    'const': POTENTIAL_CONST,
    'constant': POTENTIAL_CONST,
    'custom': POTENTIAL_CUSTOM,
}

H7_GRID_POINTS = 101
H7_FIT_TERMS = 10
# Fitted ratios above this are treated as polynomial decay; the exponent decides summability
H7_GEOMETRIC_RATIO = 0.9
H7_MIN_EXPONENT = 1.05
