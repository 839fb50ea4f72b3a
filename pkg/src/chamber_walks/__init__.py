"""Exact random walks on chambers of hyperplane arrangements."""

from .arrangements import (
    Arrangement,
    CapExceeded,
    Graph,
    IntersectionElement,
    chromatic_polynomial,
    containing_chamber,
    enumerate_chambers,
    enumerate_faces,
    face_product,
    intersection_lattice,
    zaslavsky_check,
)
from .walks import (
    Distribution,
    FaceMeasure,
    Spectrum,
    TransitionMatrix,
    build_transition,
    coupling_bound_mc,
    eigenvalue_bound,
    exact_tv_curve,
    is_separating,
    luce_stationary,
    simulate,
    spectrum,
    stationary,
    tv_distance,
    verify_spectrum_by_traces,
)

__version__ = "0.1.0"
