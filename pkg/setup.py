"""Build script: compiles the optional native kernel extension.

Set DEFI_RANK_SKIP_NATIVE=1 to install without the compiled core; the
package then falls back to the numpy/pure-Python kernels at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("DEFI_RANK_SKIP_NATIVE"):
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "defi_rank._native._kernels",
                ["src/defi_rank/_native/_kernels.pyx"],
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
