"""nullcast: noise-subspace waveform design and subspace concurrence for opportunistic links."""

__version__ = "0.1.0"
