"""Builds the optional Cython kernels; the package works without them."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("dotalg._kernels", ["src/dotalg/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        quiet=True,
    )
except Exception as exc:  # noqa: BLE001
    print(f"building without compiled kernels: {exc}")

setup(ext_modules=ext_modules)
