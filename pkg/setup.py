import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; hardyz.kernels falls back to numpy
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("hardyz._ckernels", ["src/hardyz/_ckernels.pyx"],
                   extra_compile_args=["-O3"], include_dirs=[numpy.get_include()])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
