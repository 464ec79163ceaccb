from fastapi import FastAPI

from . import __version__
from .api.v1 import experiments

app = FastAPI(title="UEC Lab API", version=__version__)
app.include_router(experiments.router, prefix="/api/v1")
