"""Exact limit-set computations for monotone maps on finite trees and shift spaces."""
