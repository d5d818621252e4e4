import numpy as np
from setuptools import setup
from setuptools.extension import Extension
from Cython.Build import cythonize

extensions = cythonize(
    [
        Extension(
            "array_tse._kernels._impl",
            ["src/array_tse/_kernels/_impl.pyx"],
            include_dirs=[np.get_include()],
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

setup(ext_modules=extensions)
