"""Bessel-Riesz Verifier"""
__version__ = "0.1.0"
