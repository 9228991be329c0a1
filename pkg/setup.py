import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("QMUSE_NO_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        # fallback kernels are selected at import time
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "qmuse._kernels",
                    ["src/qmuse/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
