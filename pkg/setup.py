"""Build script: compiles the optional Cython box kernels.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the dataset builders and proposal
filtering faster.  To compile in place:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pointqa.boxops._kernels_cy",
                ["src/pointqa/boxops/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
