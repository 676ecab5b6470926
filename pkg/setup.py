"""Build script: compiles the optional native kernels.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so any failure to build it is downgraded to a
warning instead of aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(
            f"WARNING: could not build oimsim native kernels ({exc}); "
            "falling back to the pure-Python backend.",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "WARNING: Cython not available; building oimsim without native kernels.",
            file=sys.stderr,
        )
        return []
    ext = Extension(
        "oimsim._kernels._native",
        ["src/oimsim/_kernels/_native.pyx"],
        language="c++",
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
