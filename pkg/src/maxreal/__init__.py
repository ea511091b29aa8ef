"""Maximum realizability: bounded synthesis of Mealy machines that satisfy a
hard LTL specification and maximize the satisfaction of soft ones, via
partial weighted MaxSAT."""

__version__ = "0.1.0"
