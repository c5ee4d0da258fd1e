"""
Series kinds, determinant sources and tail-model thresholds
"""

# Per-word quantity summed over a shell of words
KIND_TRACE = 'trace'            # W / (1 - phi')
KIND_TRACE_GEOMETRIC = 'trace_geo'  # W phi' / (1 - phi'), the signed weight e^w / G'
KIND_PERIODIC = 'periodic'      # W at the fixed point
KIND_GRID = 'grid'              # W(x) on a grid of points, no fixed points

SOURCE_W = 'w'
SOURCE_GEOMETRIC = "w-log G'"
SOURCE_CHOICES = [(SOURCE_W, 'Q_w'), (SOURCE_GEOMETRIC, "Q_{w - log G'}")]

MODEL_GEOMETRIC = 'geometric'
MODEL_POWER = 'power'
MODEL_NONE = 'none'
MODEL_OPERATOR = 'operator'

# |z| e^{v(0)} above this counts as the polynomial boundary case
GEOMETRIC_EDGE = 1.0 - 1e-9
# Fitted power-law exponents within this distance of an integer are rounded
EXPONENT_SNAP = 0.15
POWER_FIT_MAX_SHELLS = 60
PRECISION_WARNING_FRACTION = 0.1

# Words summed one by one before the operator-trace tail takes over
BOX_MAX_WORDS = 100_000

# Rows per vectorized fixed-point solve
CHUNK_WORDS = 65536

ZETA_T_MAX_PERIOD = 20
PRESSURE_T_RECOMMENDED = 14
POLE_DISTANCE = 1e-8

DET_RELIABLE_MARGIN = 0.8
