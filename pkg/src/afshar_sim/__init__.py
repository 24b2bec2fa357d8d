"""Wave-optics and spin-algebra simulations of wire-grid which-way experiments."""

from .field import GridSpec, Mask, ScalarField, gaussian_beam, intensity, make_grid, slit, slit_pair, total_flux
from .optics import apply_mask, edge_absorber, propagate, thin_lens, wire_grid
from .scenarios import ApparatusPlan, Variant, build_classic, build_modified, run_matrix, run_variant

__version__ = "0.1.0"
