"""Exception hierarchy shared across the package.

Every error the CLI can surface as structured JSON derives from GaussMapError
and carries a stable ``code`` plus an optional ``location`` payload (parameter
values, vertex ids, byte offsets) so callers can point at the offending input.
"""
from __future__ import annotations

from typing import Any


class GaussMapError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str, location: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.location = location or {}

    def payload(self) -> dict[str, Any]:
        out: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.location:
            out["location"] = self.location
        return out


class ExprSyntaxError(GaussMapError):
    code = "expr_syntax"


class ExprDomainError(GaussMapError):
    code = "expr_domain"


class DegenerateJacobian(GaussMapError):
    code = "degenerate_jacobian"


class ZeroPlueckerVector(GaussMapError):
    code = "zero_pluecker_vector"


class DegenerateMetric(GaussMapError):
    code = "degenerate_metric"


class SingularForm(GaussMapError):
    code = "singular_form"


class ZeroVector(GaussMapError):
    code = "zero_vector"


class FormSpecError(GaussMapError):
    code = "form_spec"


class CertificationFailed(GaussMapError):
    code = "certification_failed"


class DomainError(GaussMapError):
    """Bad integration domain or quadrature settings."""

    code = "domain"


class MeshError(GaussMapError):
    code = "mesh"


class OpenMesh(MeshError):
    code = "open_mesh"


class BoundaryVertex(MeshError):
    code = "boundary_vertex"


class ZeroLengthEdge(MeshError):
    code = "zero_length_edge"


class DegenerateTriangle(MeshError):
    code = "degenerate_triangle"


class DegenerateTetrahedron(MeshError):
    code = "degenerate_tetrahedron"


class LinkNotSphere(MeshError):
    code = "link_not_sphere"


class ManifestError(GaussMapError):
    code = "manifest"
