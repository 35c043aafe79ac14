"""Shared domain types, seeded randomness and categorical-distribution maths."""
