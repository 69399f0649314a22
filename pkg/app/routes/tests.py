from fastapi import APIRouter, Path
from fastapi.concurrency import run_in_threadpool

from app.schemas.enums import CliMethod
from app.schemas.run import TestOptions, TestRequest
from app.schemas.sample import PairedSample
from app.services.report import ReportService

test_routes = APIRouter(prefix="/tests", tags=["Paired Test Endpoints"])


@test_routes.post("/{method}")
async def run_test(body: TestRequest, method: CliMethod = Path(...)):
    sample = PairedSample.from_arrays(body.x, body.y, body.feature_names)
    options = TestOptions(**body.model_dump(exclude={"x", "y", "feature_names"}))
    return await run_in_threadpool(ReportService.run, method, sample, options)
