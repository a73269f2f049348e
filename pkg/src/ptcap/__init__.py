"""Numerical Polya-Chebotarev continua and the extremal constants built on them."""

__version__ = "0.1.0"
