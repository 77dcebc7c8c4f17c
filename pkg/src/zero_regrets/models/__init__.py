"""Concrete game families."""
