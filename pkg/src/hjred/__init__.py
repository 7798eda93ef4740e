"""Hamilton-Jacobi analysis of singular Lagrangians.

Pipeline: ``model`` loads a system, ``legendre`` builds the Hamilton-Jacobi
set, ``chain`` runs the integrability conditions, ``dynamics`` integrates the
flows, and ``quantize``/``pathint`` run the numeric quantization checks.
"""

__version__ = "0.1.0"
