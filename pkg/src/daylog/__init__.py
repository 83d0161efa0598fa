"""daylog: audio + IMU daily-log pipeline over synthetic scenes with exact oracles."""

__version__ = "0.1.0"
