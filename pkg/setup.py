import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install, kernels fall back to numpy
    cythonize = None

ext_modules = []
if cythonize is not None and os.environ.get("PARAMCTL_NO_EXT", "") in ("", "0"):
    ext_modules = cythonize(
        [
            Extension(
                "paramctl._kernels",
                [os.path.join("src", "paramctl", "_kernels.pyx")],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
