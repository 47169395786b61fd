"""repopulse: longitudinal in-process software metrics mined from git
histories and issue trackers."""

__version__ = "0.1.0"
