"""Build script: compiles the optional split-search extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failing C build must not fail the install.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that downgrades compiler failures to a warning."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled split-search kernel failed "
            f"({exc!r}); falling back to the pure-numpy implementation.",
            file=sys.stderr,
        )


ext_modules = []
cmdclass = {}
if not os.environ.get("NEUROSEARCH_PURE_PY"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "neurosearch._fastsplit",
                    ["src/neurosearch/_fastsplit.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError as exc:
        print(f"WARNING: Cython/numpy unavailable ({exc}); skipping extension.", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass=cmdclass)
