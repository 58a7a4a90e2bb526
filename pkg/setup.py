import os

import numpy
from setuptools import Extension, setup

# STREAMQV_SKIP_CYTHON=1 installs the pure-Python package only.
ext_modules = []
if not os.environ.get("STREAMQV_SKIP_CYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "streamqv._kernels",
                    ["src/streamqv/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
