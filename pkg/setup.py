import os

from setuptools import setup

# The compiled statement-counting kernel is optional: the package falls back
# to the pure-Python counter when the extension is absent (ANNOHUB_PURE=1
# skips the build entirely).
ext_modules = []
if not os.environ.get("ANNOHUB_PURE"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/annohub/_speedups.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
