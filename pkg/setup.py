import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off: the pure-python fallback must produce bit-identical
# superpixel maps, so the C side must not fuse multiply-adds.
ext = Extension(
    "fluidlabel._slic_c",
    sources=["src/fluidlabel/_slic_c.pyx"],
    include_dirs=[numpy.get_include()],
    extra_compile_args=["-O3", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
