"""Build the optional compiled path kernel; the package works without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HJB_NO_EXT") != "1":
    try:
        import numpy  # noqa: F401
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("hjb.kernels._cpaths", ["src/hjb/kernels/_cpaths.pyx"],
                       extra_compile_args=["-O3", "-ffp-contract=off"])],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
