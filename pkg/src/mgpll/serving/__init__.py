# Prediction service
from .api import HAS_FASTAPI, create_app

__all__ = ["HAS_FASTAPI", "create_app"]
