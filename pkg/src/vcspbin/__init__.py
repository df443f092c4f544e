"""Binarisation pipeline for valued constraint satisfaction problems."""

from .core import (INF, Constraint, CostFunction, Domain, Instance, Language,
                   eval_cost_function, eval_instance, feas)

__all__ = ["INF", "Constraint", "CostFunction", "Domain", "Instance", "Language",
           "eval_cost_function", "eval_instance", "feas"]
