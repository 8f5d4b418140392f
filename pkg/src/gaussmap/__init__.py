"""Homotopy invariants of immersed manifolds.

The smooth route evaluates a chart's 2-jet, passes to tangent-plane
coordinates (maximal minors of the Jacobian), pulls a closed form back
through them and integrates; certified near-integers are the invariants.
The polyhedral route folds angle and solid-angle defects over simplicial
meshes.  The ``gaussmap`` command line wraps both.
"""
from .errors import (BoundaryVertex, CertificationFailed, DegenerateJacobian,
                     DegenerateMetric, DegenerateTetrahedron,
                     DegenerateTriangle, DomainError, ExprDomainError,
                     ExprSyntaxError, FormSpecError, GaussMapError,
                     LinkNotSphere, ManifestError, MeshError, OpenMesh,
                     SingularForm, ZeroLengthEdge, ZeroPlueckerVector,
                     ZeroVector)
from .expr import eval_jet2, eval_value, parse, to_text
from .forms import (canonical_density, form_spec_to_text,
                    gauss_bonnet_density, generic_pluecker_density,
                    kaehler_density, parse_form_spec, projective_density)
from .geometry import (ConeChart, ImmersionChart, JetFrame, PlueckerVector,
                       cone_frame, immersion_check, jacobian_frame,
                       minor_index_sets, pluecker)
from .integrate import (Certification, DomainSpec, IntegralResult, Interval,
                        QuadratureSpec, certify, integrate,
                        normalization_constant, tensor_nodes)
from .invariants import (InvariantReport, ProjectiveInvariants,
                         euler_characteristic, form_invariant, gauss_degree,
                         kaehler_invariant, projective_invariants,
                         winding_number)
from .manifest import Manifest, load_manifest, parse_manifest
from .polyhedral import (SimplicialImmersion, exterior_angle_2,
                         exterior_angle_3, interior_angle, load_mesh_json,
                         load_off, polygon_exterior_angles, solid_angle,
                         total_invariant_2, total_invariant_3)

__version__ = "0.1.0"

__all__ = [
    # expression and chart layer
    "parse", "to_text", "eval_jet2", "eval_value",
    "ImmersionChart", "ConeChart", "JetFrame", "PlueckerVector",
    "jacobian_frame", "cone_frame", "minor_index_sets", "immersion_check",
    "pluecker",
    # densities
    "canonical_density", "gauss_bonnet_density", "kaehler_density",
    "projective_density", "generic_pluecker_density", "parse_form_spec",
    "form_spec_to_text",
    # quadrature and certification
    "Interval", "DomainSpec", "QuadratureSpec", "IntegralResult",
    "Certification", "integrate", "tensor_nodes", "certify",
    "normalization_constant",
    # smooth invariants
    "InvariantReport", "ProjectiveInvariants", "winding_number",
    "gauss_degree", "euler_characteristic", "kaehler_invariant",
    "projective_invariants", "form_invariant",
    # manifests
    "Manifest", "parse_manifest", "load_manifest",
    # polyhedral invariants
    "SimplicialImmersion", "load_off", "load_mesh_json", "interior_angle",
    "solid_angle", "polygon_exterior_angles", "exterior_angle_2",
    "total_invariant_2", "exterior_angle_3", "total_invariant_3",
    # errors
    "GaussMapError", "ExprSyntaxError", "ExprDomainError",
    "DegenerateJacobian", "ZeroPlueckerVector", "DegenerateMetric",
    "SingularForm", "ZeroVector", "FormSpecError", "CertificationFailed",
    "DomainError", "MeshError", "OpenMesh", "BoundaryVertex",
    "ZeroLengthEdge", "DegenerateTriangle", "DegenerateTetrahedron",
    "LinkNotSphere", "ManifestError",
    "__version__",
]
