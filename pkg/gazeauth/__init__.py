"""
GazeAuth - Eye-Movement Authentication Lab

A desk-scale laboratory for gaze-based authentication: synthetic gaze corpora
with calibration geometry, velocity preprocessing, metric-learned embeddings
and biometric evaluation of calibration, signal-quality and axis factors.
"""

__version__ = "1.0.0"
