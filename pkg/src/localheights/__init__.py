"""Local intersection numbers of linear cycles via buildings and symmetric spaces."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
