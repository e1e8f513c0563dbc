DOMAIN = 'monge_ampere_lab'

# Geometric predicates
HULL_TOLERANCE = 1e-10
ACTIVE_TOLERANCE = 1e-9
DUALITY_TOLERANCE = 1e-8
MERGE_TOLERANCE = 1e-12
QUADRATURE_TOLERANCE = 1e-10
ROOT_TOLERANCE = 1e-10

# Caffarelli example: jump of d|x| across {x = 0}
CAFFARELLI_LINE_DENSITY = 2.0
LINE_DENSITY_TOLERANCE = 0.05

# Obstacle and boundary data
OBSTACLE_CAP = 5.0
BOUNDARY_OFFSET = 10.0
DEFAULT_ALPHA = 0.5
DEFAULT_EPSILON = 0.2
DEFAULT_RHO = 0.5
DEFAULT_RADIUS = 2.0

# Transport examples
SQUARE_FRAME_LAMBDA = 0.8
PACMAN_SLOPE = 2.0
CATS_EYE_E = 5.0
CATS_EYE_R2 = 2.0 / 15.0
CURVE_VERTICES = 256
MIN_SITES = 4
MIN_ACCEPTANCE = 0.01
DEFAULT_JUMP_THRESHOLD = 0.3

# Output
CSV_FORMAT = '%.12g'
SOLUTION_FILE = 'solution.csv'
PROFILE_FILE = 'profile.csv'
SINGULAR_FILE = 'singular.csv'
DUAL_FILE = 'dual.csv'
REPORT_FILE = 'report.json'
FRAMES_DIR = 'frames'

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_CONFIG_ERROR = 2
