"""Combinatorial calculus for Legendrian fronts and Lagrangian cobordism certificates."""
from .front import (
    ClassicalInvariants, Event, FrontDiagram, FrontSyntaxError, FrontValidityError,
    LegcalcError, OrientedDiagram, invariants, orient, parse_front, serialize_front,
)
from .moves import (
    IsotopyCertificate, IsotopyMove, MoveError, SearchBudgetExceeded, apply_move,
    enumerate_moves, normal_form, search_isotopy, verify_isotopy,
)
from .cobordism import (
    CobordismCertificate, CobordismReport, CobordismStep, Cup, Isotopy, Pinch,
    ReplayError, check, load_certificate, parse_certificate, replay,
    serialize_certificate,
)

__version__ = "0.1.0"
