# ============================================
# IMPORTS
# ============================================
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .database import Base, engine
from .errors import NullcastError
from .routers import configs, experiments

# ============================================
# CREATE DATABASE TABLES
# ============================================
Base.metadata.create_all(bind=engine)

# ============================================
# CREATE FASTAPI APP
# ============================================
app = FastAPI(
    title="nullcast",
    description="Noise-subspace waveform design and subspace concurrence experiments, run as background jobs",
    version=__version__
)

app.include_router(configs.router)
app.include_router(experiments.router)


@app.exception_handler(NullcastError)
async def nullcast_error_handler(request: Request, exc: NullcastError):
    return JSONResponse(status_code=422, content={"detail": str(exc), "code": exc.code})


# ============================================
# ROOT ENDPOINTS
# ============================================
@app.get("/")
def root():
    return {
        "message": "nullcast experiment API",
        "version": __version__,
        "docs": "/docs",
        "redoc": "/redoc"
    }


@app.get("/health")
def health_check():
    return {
        "status": "healthy",
        "message": "API is running successfully",
        "version": __version__
    }
