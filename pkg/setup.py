"""Build script for the optional compiled rasterization kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes landmark stroking faster. Build
in-place with:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy

    ext_modules = cythonize(
        [
            Extension(
                "provisim._kernels._distfield",
                sources=["src/provisim/_kernels/_distfield.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
