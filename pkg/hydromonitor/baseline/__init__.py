# This file makes the baseline directory a Python package
from hydromonitor.baseline.bug2 import (
    Bug2Mode,
    Bug2Params,
    Bug2Policy,
    Bug2State,
    bug2_command,
    heading_error,
    select_target,
)
