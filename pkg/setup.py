import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("TWINWELL_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "twinwell._shoot",
                    ["src/twinwell/_shoot.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython available: install the pure-Python lane only.
        ext_modules = []

setup(ext_modules=ext_modules)
