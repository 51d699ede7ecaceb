import os
import os.path as osp

# Where experiment outputs are saved by default:
DEFAULT_DATA_DIR = osp.join(osp.abspath(osp.dirname(osp.dirname(__file__))), "data")

# Shipped reference data (configuration, optical table, published correlations):
PACKAGE_DATA_DIR = osp.join(osp.abspath(osp.dirname(__file__)), "data")

# Default experiment configuration, pre-populated with the published settings:
DEFAULT_CONFIG_PATH = osp.join(PACKAGE_DATA_DIR, "published_config.json")

# Whether to automatically insert a date and time stamp into the names of
# save directories:
FORCE_DATESTAMP = False

# Whether ExperimentGrid provides automatically-generated default shorthands:
DEFAULT_SHORTHAND = True

# Tells the ExperimentGrid how many seconds to pause for before launching
# a sweep.
WAIT_BEFORE_LAUNCH = 0

# Number of joblib workers used for trial generation ("auto" = physical cores).
_WORKERS_ENV = os.environ.get("KSION_WORKERS", "1")
DEFAULT_WORKERS = _WORKERS_ENV if _WORKERS_ENV == "auto" else int(_WORKERS_ENV)

# Trials per sampling block. Blocks are the unit of parallel work; the
# outcomes do not depend on this value.
DEFAULT_BLOCK_SIZE = 250000
