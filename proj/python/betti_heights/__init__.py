"""Heights, Betti forms and Brody reparametrisation for elliptic surfaces over C(t)."""

from ._core import (
    Error,
    Section,
    Surface,
    __version__,
    betti_density_at,
    brody,
    cli,
    counterexample_sweep,
    example_closed_form,
    fiber_periods,
    fs_density,
    full_height,
    generic_partial_height,
    gram,
    nondeg_ratio,
    partial_height,
    tate_height,
)

__all__ = [
    "Error",
    "Section",
    "Surface",
    "betti_density_at",
    "brody",
    "cli",
    "counterexample_sweep",
    "example_closed_form",
    "fiber_periods",
    "fs_density",
    "full_height",
    "generic_partial_height",
    "gram",
    "nondeg_ratio",
    "partial_height",
    "tate_height",
]
