from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/stclab/kernels/_core.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-Python fallback in stclab.kernels._ref is used instead.
    ext_modules = None

setup(ext_modules=ext_modules)
