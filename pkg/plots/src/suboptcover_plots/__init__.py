"""Figure rendering for suboptcover artifacts."""

from .figures import render
from .schemas import SchemaError

__version__ = "0.1.0"
