"""Builds the optional Cython kernels; the package works without them."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the numpy kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("floquet_pt._kernels._ckernels",
                   ["src/floquet_pt/_kernels/_ckernels.pyx"],
                   extra_compile_args=["-O3", "-fcx-limited-range"], optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
