"""Build the optional compiled tokenizer.

The package is pure Python except for the C-source tokenizer, which has a
Cython twin for indexing large codebases. The extension is optional: if
Cython or a C compiler is unavailable the install still succeeds and the
package falls back to the pure-Python tokenizer at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "speckernel.indexer._ctokenizer",
                ["src/speckernel/indexer/_ctokenizer.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
