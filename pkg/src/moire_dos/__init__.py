"""Density of states of incommensurate bilayer Schrodinger operators by planewaves."""

from .kernels import BACKEND
from .lattice import (Lattice, WaveVectorSet, ball_volume, enumerate_pairs, fold_to_cell,
                      incommensurability_diagnostic, reciprocal_basis, square_lattice)
from .potential import FourierPotential, eval_real, gaussian_model, table_model, zero_potential
from .hamiltonian import ShiftedHamiltonian, assemble, dump_matrix, load_matrix
from .testfn import TestFunction, fermi_energy, gaussian
from .spectral import EigenDecomposition, eig_hermitian, matrix_function_element, reciprocal_ldos
from .dos import (DosResult, QuadratureMesh, System, config_ldos, dos_config_average,
                  dos_scheme_a, dos_scheme_b, spatial_ldos)
from .cache import clear_cache

__version__ = "0.1.0"
