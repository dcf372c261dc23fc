"""Certify minimal disjoint partitions of closed geodesics via finite covers."""
__version__ = "0.1.0"
