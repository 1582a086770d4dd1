import sys

from setuptools import Extension, setup

# The compiled kernels are an optional speedup: the package falls back to the
# numpy backend when the extension is absent, so a failed build must not
# block installation.
ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "fanolines._kernels._fast",
                ["src/fanolines/_kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover
    sys.stderr.write(f"warning: compiled kernels skipped ({exc}); using fallback backend\n")

setup(ext_modules=ext_modules)
