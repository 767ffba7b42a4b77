"""Build script for the compiled greedy-selection core.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure numpy implementation
(see clasmk._backend).
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
                "clasmk._greedy",
                ["src/clasmk/_greedy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    import sys

    print(f"clasmk: skipping compiled core ({exc}); pure-python fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
