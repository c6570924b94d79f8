"""Build script for the optional compiled kernel core.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); the extension only accelerates the
hot inner loops (consensus rounds, block-Jacobi solver rounds, and the
cyclic-rotation eigensolver).
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the accelerator if possible, fall back to pure Python if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
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
            f"swarmrig: compiled kernels unavailable ({exc}); "
            "falling back to the pure-Python backend"
        )


extensions = [
    Extension(
        "swarmrig._kernels",
        ["src/swarmrig/_kernels.pyx"],
        # -ffp-contract=off keeps the compiled kernels bit-identical to the
        # pure-Python fallback (no fused multiply-adds).
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

if os.environ.get("SWARMRIG_NO_EXT") == "1":
    ext_modules = []
else:
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            extensions, compiler_directives={"language_level": "3"}
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
