"""kondotri: tripartite entanglement across impurity transitions in Kondo-type spin chains."""

__version__ = "0.1.0"
