from .server import entrypoint

entrypoint()
