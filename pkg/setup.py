"""Build script. Compiles the optional contact-simulator kernel.

The package works without the compiled extension (a NumPy fallback is
selected at import time), so the extension is marked optional and any
build failure degrades gracefully.
"""

import os

from setuptools import setup

PYX = os.path.join("src", "ringtumble", "highfi", "_core.pyx")

ext_modules = []
try:
    if not os.path.exists(PYX):
        raise ImportError
    import numpy
    from setuptools import Extension
    from Cython.Build import cythonize

    ext = Extension(
        "ringtumble.highfi._core",
        [PYX],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
