# ASGI entrypoint: `uvicorn src.api.main:app`. Routes live in src/api/routes.py.

from fastapi import FastAPI

from src import __version__
from src.api.routes import router

app = FastAPI(title="graphon-spectra API", version=__version__)
app.include_router(router)
