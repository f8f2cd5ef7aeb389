"""Video inpainting through a scene template shared by every frame."""

__version__ = "0.1.0"

__all__ = [
    "config",
    "errors",
]
