"""Build script for the optional Cython kernels.

The package works without the extension: ``attocell._kernels`` falls back to
numpy implementations when ``_core`` cannot be imported.
"""
import os
import sys

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ATTOCELL_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython not available; building pure-Python package", file=sys.stderr)
    else:
        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        extensions = [
            Extension(
                "attocell._kernels._core",
                ["src/attocell/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math: the kernels must round exactly like the numpy fallback
                extra_compile_args=["-O3", "-funroll-loops", "-ffp-contract=off"] + openmp,
                extra_link_args=openmp,
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ]
        ext_modules = cythonize(
            extensions,
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )

setup(ext_modules=ext_modules)
