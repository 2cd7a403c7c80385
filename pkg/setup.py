import os

import numpy as np
from setuptools import Extension, setup

_numpy_root = os.path.dirname(np.__file__)

try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python kernels are used instead
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "condtest.kernels._fast",
                sources=["src/condtest/kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                library_dirs=[
                    os.path.join(_numpy_root, "random", "lib"),
                    os.path.join(_numpy_root, "_core", "lib"),
                ],
                libraries=["npyrandom", "npymath"],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
