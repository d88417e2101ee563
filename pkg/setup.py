"""Build hook for the optional compiled elimination core.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); building it just makes the row-reduction kernel
faster.  `pip install -e . --no-build-isolation` compiles it when a C
toolchain and Cython are available.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "zzmr._gfcore",
                ["src/zzmr/_gfcore.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
