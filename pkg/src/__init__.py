"""
nrdual - normal realizations of linear codes over Z_p and their duals

Core package: exact algebra, code and realization services, weight adjacency
matrices with the MacWilliams identity, and the sum-product update in both
domains.
"""

__version__ = "1.0.0"
