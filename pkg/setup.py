"""Build script: compiles the optional Cython integration kernel.

The package works without the extension (a pure-numpy loop is selected at
import time), so a missing Cython/C toolchain only costs speed.
"""

import os

from setuptools import Extension, setup

PYX = "src/mracsim/_loop.pyx"

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("mracsim._loop", [PYX])], language_level="3"
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
