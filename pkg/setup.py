"""Build script: compiles the optional fast-kernel extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time), so a failed compile only costs
speed, not features.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "memspath._core",
                ["src/memspath/_core.pyx"],
                extra_compile_args=["-O2", "-fwrapv"],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
