"""All constants for fracvol."""

__version__ = "0.1.0"
REQUIRED_PYTHON_VER = "3.8"

# configuration sections
CONF_KEY_MODEL = "model"
CONF_KEY_VOL = "vol"
CONF_KEY_MARKET = "market"
CONF_KEY_LATTICE = "lattice"
CONF_KEY_MC = "mc"
CONF_KEY_SAMPLER = "sampler"
CONF_KEY_FIELD = "field"
CONF_KEY_OUTPUT = "output"

# configuration keys/attributes
CONF_HURST = "hurst"
CONF_EPSILON = "epsilon"
CONF_KIND = "kind"
CONF_PARAMS = "params"
CONF_SPOT = "spot"
CONF_RHO = "rho"
CONF_TIME = "t"
CONF_STRIKES = "strikes"
CONF_MATURITIES = "maturities"
CONF_N_PATHS = "n_paths"
CONF_STEPS_PER_EPS = "steps_per_eps"
CONF_SCHEME = "scheme"
CONF_ANTITHETIC = "antithetic"
CONF_EPS_LADDER = "eps_ladder"
CONF_BATCH_SIZE = "batch_size"
CONF_GRID_SIZE = "grid_size"
CONF_DT = "dt"
CONF_METHOD = "method"
CONF_MODE = "mode"
CONF_REALIZATIONS = "realizations"
CONF_PATH = "path"
CONF_FORMAT = "format"
CONF_SEED = "seed"
CONF_COMMAND = "command"
CONF_FIGURE = "figure"
CONF_MOMENTS = "moments"

# commands
COMMANDS = ("simulate", "price", "ivsurface", "ttfield", "validate", "figures")
JSON_COMMANDS = ("price", "validate")
OUTPUT_FORMATS = ("csv", "json")

# environment
ENV_THREADS = "FRACVOL_THREADS"
ENV_DEBUG = "DEBUG"

# exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

# sampler defaults (dimensionless spans are in units of eps)
STEPS_PER_EPS = 20
HISTORY_SPAN_EPS = 50.0
FAR_HISTORY_EPS = 1.0e6
FAR_HISTORY_GROWTH = 1.1
HISTORY_TOLERANCE = 1.0e-4
CHOLESKY_MAX_POINTS = 4096
CIRCULANT_BURN_IN_EPS = 30.0
JITTER_LADDER = (0.0, 1.0e-14, 1.0e-13, 1.0e-12, 1.0e-11, 1.0e-10)

# kernel / quadrature defaults
KERNEL_SERIES_CUTOFF = 6.0
KERNEL_ASYMPTOTIC_CUTOFF = 40.0
KERNEL_ASYMPTOTIC_TERMS = 20
HERMITE_NODES = 64
HERMITE_MAX_NODES = 1024
MOMENT_TOLERANCE = 1.0e-10
TABLE_MOMENT_TOLERANCE = 1.0e-6
PHI_TIME_NODES = 96
PHI_HERMITE_NODES = 48
TAIL_SPLIT = 100.0
HERMITE_K_MAX = 60

# implied volatility
BISECTION_STEPS = 20
INVERSION_TOLERANCE = 1.0e-12
IV_VALIDITY_BOUND = 0.5

# t-T field
FIELD_GRID_SIZE = 512

# monte carlo
MC_MIN_PATHS = 1000
MC_MIN_STEPS_PER_EPS = 10
MC_BATCH_SIZE = 2000

# figure presets
FIGURE_HURST = 0.6
FIGURE_SKEW = 0.1
FIGURE_AMPLITUDE = 0.04
FIGURE_MONEYNESS = (0.9, 1.0, 1.1)
FIGURE_NUMBERS = (1, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13)

# output
FLOAT_DIGITS = 17
CSV_COMMENT = "# "
