"""Wave Matrix Lindbladization: simulation of Lindbladian dynamics from
program states, with channel-distance metrics and sample-complexity
experiments."""

__version__ = "0.1.0"
