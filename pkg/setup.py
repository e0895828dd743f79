"""Build script for the optional compiled kernels.

If Cython or a C compiler is unavailable the package still installs and
falls back to the pure-Python implementation at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("TERPGEOM_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "terpgeom._kernels",
            ["src/terpgeom/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
