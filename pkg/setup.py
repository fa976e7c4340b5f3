import os

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    USE_CYTHON = os.environ.get("ACW_NO_EXT", "") == ""
except ImportError:
    USE_CYTHON = False


ext_modules = []
if USE_CYTHON:
    ext_modules = cythonize(
        [
            Extension(
                "acw._kernels",
                ["src/acw/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )

setup(ext_modules=ext_modules)
