"""Build script for the optional compiled CPG kernel.

The package works without the extension (a NumPy fallback is selected at
import time); building it just makes the oscillator integration loop fast.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "oncilla._kernel",
                ["src/oncilla/_kernel.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython/NumPy not available at build time; skipping compiled kernel")

setup(ext_modules=ext_modules)
