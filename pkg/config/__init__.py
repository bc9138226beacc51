"""Configuration helpers for limitlab."""
