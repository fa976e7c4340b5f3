"""Executable additive-combinatorics toolkit on finite abelian groups.

Entropic Ruzsa calculus, a tau-functional decrement search, Fourier and
Bohr-set constructions, and an end-to-end covering certificate pipeline.
"""

from .config import caps_override, get_caps, set_caps
from .dist import (
    Dist,
    FiberFamily,
    cond_on_sum,
    convolve,
    entropy,
    fiber_family,
    iterate_sum,
    kl_divergence,
    l1_distance,
    push_forward,
    renyi,
    uniform_on,
)
from .groups import (
    Character,
    Group,
    GroupSpec,
    Homomorphism,
    char_eval,
    group_op,
    hom_apply,
    make_group,
    subgroup_from_generators,
)
from .kernels import BACKEND

__version__ = "0.1.0"
