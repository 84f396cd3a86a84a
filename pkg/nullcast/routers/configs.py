# ============================================
# CONFIG IMPORT / TEMPLATES
# ============================================

import io

from fastapi import APIRouter, File, HTTPException, UploadFile
from fastapi.responses import StreamingResponse
from pydantic import ValidationError

from ..errors import ConfigInvalid
from ..harness import config_template, parse_config_text
from ..schemas import ExperimentConfig, ExperimentName

router = APIRouter(
    prefix="/api/experiments/config",
    tags=["experiment-config"]
)

ALLOWED_TYPES = (".yaml", ".yml")


def validate_file_type(filename: str) -> bool:
    return filename.lower().endswith(ALLOWED_TYPES)


@router.post("/import")
async def import_config(file: UploadFile = File(...)):
    """
    Validate an uploaded YAML config.

    Returns the normalized config, or a 400 with one entry per invalid field.
    """
    if not validate_file_type(file.filename or ""):
        raise HTTPException(status_code=400, detail="Invalid file type. Upload a .yaml or .yml file")

    contents = await file.read()
    try:
        data = parse_config_text(contents)
    except ConfigInvalid as e:
        raise HTTPException(status_code=400, detail=str(e))

    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]) or "config", "message": err["msg"]}
            for err in e.errors()
        ]
        raise HTTPException(status_code=400, detail=errors)

    return {
        "message": "Config is valid",
        "filename": file.filename,
        "config": cfg.model_dump(mode="json")
    }


@router.get("/template/{experiment}")
def download_template(experiment: str):
    try:
        name = ExperimentName(experiment)
    except ValueError:
        raise HTTPException(status_code=404, detail=f"Unknown experiment: {experiment}")

    return StreamingResponse(
        io.BytesIO(config_template(name).encode()),
        media_type="application/x-yaml",
        headers={"Content-Disposition": f"attachment; filename={name.value}.yaml"}
    )
