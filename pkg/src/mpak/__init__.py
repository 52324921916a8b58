"""Potential theory for fully nonlinear constraints on radial models."""

__version__ = "0.1.0"

from .expr import parse_expr, ExprError, ExprDomainError
from .jets import Jet, radial_jet, garding_branches, pucci_extremal
from .subeq import (Subequation, Intersection, Union, subeq_from_string,
                    default_catalog, duality_suite, riesz_characteristic,
                    RieszDependenceError)
from .manifold import ModelManifold, manifold_from_string
from .verdicts import Verdict, HOLDS, FAILS, INCONCLUSIVE
from .grid import Grid, GridFunction
from .solver import (solve_dirichlet, solve_obstacle, membership_margin,
                     perron_report, ahlfors_check, SolverError)
from .potential import (q_capacity, infinity_capacity, capacitor_profile,
                        infinity_capacitor_profile, evans_potential,
                        polar_potential, parabolicity, infinity_parabolicity,
                        eikonal_parabolicity, geodesic_completeness,
                        stochastic_completeness, diffusion_witness,
                        omori_yau_radial_check,
                        negative_exhaustion_hessian_check)
from .mc import simulate_radial_diffusion, MCResult
from .stack import khasminskii_stack, StackReport, LevelRecord

__all__ = [
    "parse_expr", "ExprError", "ExprDomainError",
    "Jet", "radial_jet", "garding_branches", "pucci_extremal",
    "Subequation", "Intersection", "Union", "subeq_from_string",
    "default_catalog", "duality_suite", "riesz_characteristic",
    "RieszDependenceError",
    "ModelManifold", "manifold_from_string",
    "Verdict", "HOLDS", "FAILS", "INCONCLUSIVE",
    "Grid", "GridFunction",
    "solve_dirichlet", "solve_obstacle", "membership_margin",
    "perron_report", "ahlfors_check", "SolverError",
    "q_capacity", "infinity_capacity", "capacitor_profile",
    "infinity_capacitor_profile", "evans_potential", "polar_potential",
    "parabolicity", "infinity_parabolicity", "eikonal_parabolicity",
    "geodesic_completeness", "stochastic_completeness", "diffusion_witness",
    "omori_yau_radial_check", "negative_exhaustion_hessian_check",
    "simulate_radial_diffusion", "MCResult",
    "khasminskii_stack", "StackReport", "LevelRecord",
]
