"""
Models of chemical through-reactors and packed absorption columns.

Submodules
----------
kinetics_reactor
    Non-isothermal tubular reactor: steady states, stability, transients.
chemisorption
    Gas absorption with an instantaneous reaction and a moving reaction plane.
micromixing
    Segregation-to-micromixing transfer and cell-sequence responses.
packing
    Random-walk liquid distribution over regular packings.
scale_effect
    Efficiency loss from uneven distribution in the spreading zone.
"""

__version__ = "0.1.0"
