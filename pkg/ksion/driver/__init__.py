from ksion.driver.config import ExperimentConfig, load_config, save_config
from ksion.driver.experiment import RunManifest, SimulationResult, prepare_state, run_simulation
from ksion.driver.ingest import ingest, ingest_repeatability
from ksion.driver.report import load_table1, report, table1_report
