"""Test suite for limitlab."""
