"""Switch-level full-adder simulator with conventional and adiabatic energy accounting."""

__version__ = "0.1.0"
