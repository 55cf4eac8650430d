from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/dash/_kernels/_geom.pyx",
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-Python fallback in dash._kernels.geom_py is used instead.
    pass

setup(ext_modules=ext_modules)
