from fastapi import FastAPI

from qdsbench.app.api.routes_bounds import router as bounds_router
from qdsbench.app.api.routes_health import router as health_router
from qdsbench.app.api.routes_simulate import router as simulate_router
from qdsbench.app.api.routes_verify import router as verify_router

app = FastAPI(title="qdsbench")

# Include all routers
app.include_router(health_router)
app.include_router(bounds_router)
app.include_router(simulate_router)
app.include_router(verify_router)
