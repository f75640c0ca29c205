from .state import AppState, ServiceConfig
from .app import create_app

__all__ = ["AppState", "ServiceConfig", "create_app"]
