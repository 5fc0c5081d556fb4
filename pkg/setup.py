"""Build hooks for the optional compiled diff kernels.

The package is pure Python except for stet/diff/_match_cy.pyx, which holds the
per-keystroke hot loops (subtree hashing, nearest-index matching). If Cython or
a C compiler is missing the build still succeeds and the runtime falls back to
the pure-Python kernels.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [Extension("stet.diff._match_cy", ["src/stet/diff/_match_cy.pyx"])],
        language_level=3,
    )
except Exception:
    extensions = []

setup(ext_modules=extensions)
