import os

import numpy as np
from setuptools import Extension, setup

# CPPOLAB_NO_EXT=1 installs the pure-Python fallback only.
ext_modules = []
if not os.environ.get("CPPOLAB_NO_EXT"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cppolab._core",
                ["src/cppolab/_core.pyx"],
                include_dirs=[np.get_include()],
                # no -ffast-math / -march=native: results must match the fallback
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
