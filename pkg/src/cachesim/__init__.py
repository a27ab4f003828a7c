"""One-shot device-to-device coded caching engine."""
