"""Build hook for the optional compiled kernels.

If Cython or a C compiler is unavailable the package installs without the
extension and runs on the numpy fallback.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ezdkit._kernels._modp",
                ["src/ezdkit/_kernels/_modp.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
        quiet=True,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"ezdkit: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
