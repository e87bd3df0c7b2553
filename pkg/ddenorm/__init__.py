"""
ddenorm - normal forms and branch predictors for codimension-two bifurcations
of equilibria in discrete-delay differential equations
"""

__version__ = "0.1.0"
