from fastapi import APIRouter, HTTPException

from qdsbench.app.core.checks import run_checks

router = APIRouter()


@router.get("/v1/verify/{check}")
def verify(check: str):
    """Run one analytic check, or every check when ``check`` is ``all``."""
    try:
        reports = run_checks([check])
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return {
        "passed": all(r.passed for r in reports),
        "checks": [r._asdict() for r in reports],
    }
