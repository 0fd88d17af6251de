"""Four-player Monopoly simulator with fixed-policy baselines and a DDQN trainer."""

__version__ = "0.1.0"
