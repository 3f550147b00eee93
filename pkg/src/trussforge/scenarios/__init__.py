"""Reference configurations, trajectory programs and scenario files."""
from .configurations import GEOMETRY_DEFAULTS, Configuration, ConfigurationId, build_configuration
from .loader import SCHEMA_VERSION, Scenario, build_scenario, load_scenario, load_scenario_file, validate_scenario
from .programs import (
    SUITE_ROWS,
    Segment,
    Setpoint,
    TrajectoryProgram,
    circle_program,
    force_ramp_program,
    line_program,
    manipulation_suite_segments,
    octahedron_two_box_program,
)

__all__ = [
    "GEOMETRY_DEFAULTS", "SCHEMA_VERSION", "SUITE_ROWS", "Configuration", "ConfigurationId", "Scenario",
    "Segment", "Setpoint", "TrajectoryProgram", "build_configuration", "build_scenario", "circle_program",
    "force_ramp_program", "line_program", "load_scenario", "load_scenario_file", "manipulation_suite_segments",
    "octahedron_two_box_program", "validate_scenario",
]
