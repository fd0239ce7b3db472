"""Build script for the optional compiled kernels.

The package works without a compiler: if Cython or a C toolchain is
missing the extension is skipped and ``fods_ident._pykernels`` is used.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FODS_IDENT_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "fods_ident._ckernels",
                    ["src/fods_ident/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    # no -ffast-math / FMA contraction: results must match the
                    # pure-Python fallback bit for bit
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
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
