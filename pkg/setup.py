"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
twin of every kernel ships alongside it), so a failed compile must not
fail the install.  Set CORPUSFORGE_SKIP_EXT=1 to skip the build outright.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Swallow compiler failures; the pure-Python fallback takes over."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure is non-fatal
            print(f"warning: compiled kernels skipped ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: {ext.name} skipped ({exc}); using pure-Python fallback")


ext_modules = []
if not os.environ.get("CORPUSFORGE_SKIP_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("corpusforge._kernels", ["src/corpusforge/_kernels.pyx"])],
            language_level=3,
        )
    except ImportError:
        print("warning: Cython not available; building without compiled kernels")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
