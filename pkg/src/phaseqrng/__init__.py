"""Phase-randomness QRNG: front-end simulation, digitization, min-entropy,
XOR and Toeplitz extraction, and statistical testing."""

__version__ = "0.1.0"
