"""Build script: compiles the optional native kernel extension.

The package works without the extension (pure-numpy fallback selected at
import time), so the build is marked optional and failures are non-fatal.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    native = Extension(
        "odejet.backend._native",
        sources=["src/odejet/backend/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    native.optional = True
    ext_modules = cythonize([native], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
