"""Figure renderer for simulator summary sweeps.

Reads a summary.csv produced by the a2psim sweep runner and renders delay
box plots, loss-ratio curves, and wake-up-delay curves, each with a
plain-text data sidecar holding exactly the plotted series.
"""

__version__ = "0.1.0"
