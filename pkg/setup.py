import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled core; the numpy fallback is used
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("DILUTEDMP_NO_EXT") != "1":
    ext_modules = cythonize(
        [
            Extension(
                "dilutedmp._kernels",
                ["src/dilutedmp/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
