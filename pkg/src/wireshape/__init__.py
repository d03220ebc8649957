"""Roll-bend-advance planning and shape prediction for a guidewire shaping robot."""

__version__ = "0.1.0"
