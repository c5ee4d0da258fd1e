"""
Family names and branch identifiers for interval maps
"""

BRANCH_PARABOLIC = 0
BRANCH_EXPANDING = 1
BRANCH_IDS = (BRANCH_PARABOLIC, BRANCH_EXPANDING)

FAMILY_FAREY = 'farey'
FAMILY_LSV = 'lsv'
FAMILY_PM = 'pm'
FAMILY_CUSTOM = 'custom'

FAMILY_CHOICES = [
    (FAMILY_FAREY, 'Farey'),
    (FAMILY_LSV, 'Liverani-Saussol-Vaienti'),
    (FAMILY_PM, 'Pomeau-Manneville'),
    (FAMILY_CUSTOM, 'Custom branch pair'),
]

FAMILY_ALIASES = {
    'farey': FAMILY_FAREY,
    'lsv': FAMILY_LSV,
    'pm': FAMILY_PM,
    'pomeaumanneville': FAMILY_PM,
    'pomeau-manneville': FAMILY_PM,
    'custom': FAMILY_CUSTOM,
}

# Partition point of PM is bracketed to this tolerance at construction
PM_PARTITION_TOL = 1e-15

# Grid used by the numeric expansion spot checks
EXPANSION_GRID_POINTS = 200
