"""Build script: compiles the optional walk/SGNS extension.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time); set CIPROP_SKIP_EXTENSION=1 to
skip the build explicitly.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"ciprop: extension build skipped ({exc}); using pure-Python kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"ciprop: building {ext.name} failed ({exc}); using pure-Python kernels")


def extension_modules():
    if os.environ.get("CIPROP_SKIP_EXTENSION"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "ciprop._kernels._compiled",
        ["src/ciprop/_kernels/_compiled.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=extension_modules(),
    cmdclass={"build_ext": OptionalBuildExt},
)
