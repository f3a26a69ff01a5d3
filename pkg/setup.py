"""Builds the optional compiled kernels; the package works without them."""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("PARABOLIC_SCREEN_PURE"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "parabolic_screen._ckernels",
        ["src/parabolic_screen/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3, quiet=True)


try:
    setup(ext_modules=_extensions())
except Exception as exc:  # compiler missing or failing: install the fallback only
    print(f"compiled kernels not built ({exc}); using the numpy fallback")
    setup(ext_modules=[])
