"""Build script: compiles the kernel extension when Cython is available.

The package works without the extension (pure-Python kernels are selected
at import time), so a failed or skipped extension build is not fatal for
source installs on exotic platforms.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "sgmkit.kernels._core",
                ["src/sgmkit/kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
