import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "uccprune._kernels._core",
        sources=["src/uccprune/_kernels/_core.pyx"],
        include_dirs=[numpy.get_include()],
        # -fcx-limited-range keeps gcc from routing every complex multiply
        # through the __muldc3 libcall (inf/nan recovery we never need);
        # -mpopcnt turns the per-amplitude parity popcounts into single
        # instructions (any x86-64 from the last decade has it).
        extra_compile_args=["-O3", "-fcx-limited-range", "-mpopcnt"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
