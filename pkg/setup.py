"""Optional compiled kernels. The package is fully functional without them
(pure-Python fallback selected at import); building just makes the hashing
and intersection hot loops faster."""

import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/docsieve/_kernels/_ckernels.pyx"],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[numpy.get_include()],
)
