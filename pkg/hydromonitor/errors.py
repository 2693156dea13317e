class MonitoringError(Exception):
    """Base class for every error raised by hydromonitor."""


class ConfigError(MonitoringError):
    pass


class ShapeMismatchError(MonitoringError):
    pass


class NonFiniteError(MonitoringError):
    pass


class CheckpointError(MonitoringError):
    pass


class EpisodeStateError(MonitoringError):
    pass


class PlacementError(MonitoringError):
    pass


class TrainingAborted(MonitoringError):
    """A worker or the learner failed; partial outputs were preserved."""


class ReplayUnderflowError(MonitoringError):
    pass
