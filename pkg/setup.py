from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "axcsi._kernels._fast",
                ["src/axcsi/_kernels/_fast.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # No Cython: install with the pure-Python kernel backend only.
    extensions = []

setup(ext_modules=extensions)
