from setuptools import Extension, setup
from Cython.Build import cythonize

# -ffp-contract=off keeps the compiled solver bit-compatible with the
# numpy fallback (no fused multiply-add in the margin updates).
extensions = [
    Extension(
        "pacbound._smo_cy",
        ["src/pacbound/_smo_cy.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
