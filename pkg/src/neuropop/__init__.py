"""Neural population models of evolutionary matrix games."""

from neuropop.kernels import BACKEND

__all__ = ["BACKEND"]
