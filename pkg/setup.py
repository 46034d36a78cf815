"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); building it just makes the hot
loops fast.  Set LABELBALANCE_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # no compiler, broken toolchain, ...
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            "labelbalance: compiled kernels could not be built "
            f"({exc!r}); falling back to the pure-Python implementation"
        )


ext_modules = []
if not os.environ.get("LABELBALANCE_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            "src/labelbalance/_kernels/_ckernels.pyx",
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
