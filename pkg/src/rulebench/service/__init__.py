from .app import Workspace, build_workspace, create_app

__all__ = ["Workspace", "build_workspace", "create_app"]
