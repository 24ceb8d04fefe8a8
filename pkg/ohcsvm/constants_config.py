# -----------------------------------------------------------------------
# ohcsvm/constants_config.py
# -----------------------------------------------------------------------
# Constants used throughout the library, the cli scripts and the app
# -----------------------------------------------------------------------

import math

APP_NAME = "ohc-qsvm"

# ANSI foreground/text color codes
RED     = "\033[31m"
GREEN   = "\033[32m"
YELLOW  = "\033[33m"
BLUE    = "\033[34m"
MAGENTA = "\033[35m"
CYAN    = "\033[36m"
WHITE   = "\033[37m"
GRAY    = "\033[90m"
RESET   = "\033[0m"

# Log line layout shared by the cli, the pipeline log file and the app
LOG_FORMAT = "[%(levelname)-7s] %(asctime)s %(name)s: %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

# -----------------------------------------------------------------------
# Specimen geometry (mm). In-plane dimensions are 5x the hole diameter.
# -----------------------------------------------------------------------
HOLE_DIAMETER = 6.0
PLATE_D1 = 30.0
PLATE_D2 = 30.0
PLATE_T = 1.0

# Strain sampling hypercube, identical bounds for eps11, eps22, gam12
STRAIN_BOUND = 1e-2
STRAIN_RANGE = (-STRAIN_BOUND, STRAIN_BOUND)

# Labeling
EPS_DIV = 1e-8
DEFAULT_THRESHOLD = 0.9
FAILED = -1
NON_FAILED = 1

# Feature scaling targets
CLASSICAL_RANGE = (-1.0, 1.0)
QUANTUM_RANGE = (-math.pi / 2, math.pi / 2)

# Dataset split
DEFAULT_TEST_FRACTION = 0.2

# Simulator
MAX_QUBITS = 20
NORM_TOL = 1e-10

# Kernel-target alignment training (Adam)
KTA_ITERATIONS = 200
KTA_LEARNING_RATE = 0.05
KTA_BATCH_SIZE = 64
KTA_LOG_EVERY = 10
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
FD_STEP = 1e-4

# SMO dual solver
SMO_TOL = 1e-3
SMO_ITER_PER_SAMPLE = 10_000
SUPPORT_EPS = 1e-8
CURVATURE_EPS = 1e-12

# Model selection
DEFAULT_C_GRID = tuple(10.0 ** k for k in range(8))
DEFAULT_FOLDS = 5
DEFAULT_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 11))

# Embedding grid: W in {3, 4, 6} x D in {1, 2, 3}
EMBEDDING_WIDTHS = (3, 4, 6)
EMBEDDING_DEPTHS = (1, 2, 3)

# Float format for every numeric CSV report (round-trip exact)
FLOAT_FORMAT = "%.17g"

CONFIG_SCHEMA_VERSION = 1
