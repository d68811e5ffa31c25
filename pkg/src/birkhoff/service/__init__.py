"""HTTP service wrapping the exact-arithmetic core."""
