"""Build script: compiles the optional fast raster kernels.

The package is fully functional without the extension; `caise.kernels`
falls back to the pure-Python implementation when the compiled module is
absent (or when CAISE_PURE_KERNELS=1).

FP contraction is disabled so the rotation arithmetic rounds exactly like
the pure-Python twin — the two implementations must stay byte-identical.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext = Extension(
        "caise._fastkernels",
        sources=["src/caise/_fastkernels.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": "3"})
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"caise: skipping compiled kernels ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
