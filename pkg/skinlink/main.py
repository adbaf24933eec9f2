import logging

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from contextlib import asynccontextmanager

from skinlink.config import settings
from skinlink.exceptions import AttenuationTableError
from skinlink.routers import metrics_router
from skinlink.services.link_service import cached_table


logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    logging.basicConfig(level=settings.log_level.upper())
    try:
        app.state.attenuation_table = cached_table(str(settings.attenuation_file))
    except AttenuationTableError as exc:
        raise RuntimeError(
            f"{exc}\nSet SKINLINK_ATTENUATION_FILE to a valid wavelength_nm,alpha_per_mm CSV."
        ) from exc
    logger.info(
        "✅ Attenuation table ready: %d samples (%s)",
        len(app.state.attenuation_table.wavelengths),
        app.state.attenuation_table.metadata or "no source recorded",
    )
    yield


app = FastAPI(
    title=settings.app_name,
    version=settings.app_version,
    description="Closed-form and Monte Carlo performance of transcutaneous optical links",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(metrics_router)


@app.get("/")
async def root():
    return {
        "name": settings.app_name,
        "version": settings.app_version,
        "status": "running",
        "endpoints": {
            "eval": "/metrics/eval",
            "jitter": "/metrics/jitter",
            "sweep": "/metrics/sweep",
            "validate": "/metrics/validate",
        },
    }


@app.get("/health")
async def health_check():
    return {"status": "healthy"}


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "skinlink.main:app",
        host=settings.host,
        port=settings.port,
        reload=settings.debug,
    )
