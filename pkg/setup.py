# Optional compiled core.  `python setup.py build_ext --inplace` builds the
# Cython kernels next to the pure-Python fallback; everything works without it.
from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "rectiflat._kernels_cy",
                ["src/rectiflat/_kernels_cy.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
