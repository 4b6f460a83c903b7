import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install; the simulator falls back to its numpy kernel.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "codedstream._kernel_c",
                sources=["src/codedstream/_kernel_c.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
