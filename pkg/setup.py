"""Build script.

The simulator ships an optional compiled kernel (swapsim._kernel) for the
hot Monte Carlo loop.  If Cython or a C compiler is unavailable the build
falls back to the pure-Python engine, which implements identical dynamics.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/swapsim/_kernel.pyx"],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    sys.stderr.write(f"warning: building without compiled kernel ({exc})\n")

setup(ext_modules=ext_modules)
