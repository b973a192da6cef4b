#!/usr/bin/env python3
# Build the optional compiled kernels. The package falls back to the
# numpy implementation at import time if the extension is missing, so a
# failed compile only costs speed, not functionality.
#
# In-place build for development:  python3 setup.py build_ext --inplace

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "aura.kernels._lloyd_cy",
                ["src/aura/kernels/_lloyd_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
