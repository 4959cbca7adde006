# app/models/manifest.py
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.const.enum import CommandName, GridAxis

from .estimation import SamplingScheme
from .noise import NoiseSpec


class ExperimentManifest(BaseModel):
    """
    Everything a command needs to reproduce its outputs. Flags compile to a
    manifest; `--manifest` runs one directly. The worker count is not part
    of it since outputs must not depend on it.
    """
    model_config = ConfigDict(frozen=True)

    subcommand: CommandName
    inputs: Dict[str, str] = Field(default_factory=dict)  # role -> path
    noise: Optional[NoiseSpec] = None
    scheme: Optional[SamplingScheme] = None
    axis: Optional[GridAxis] = None
    grid: Optional[List[float]] = None
    repetitions: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    out_dir: str = "results"
    params: Dict[str, Any] = Field(default_factory=dict)

    def input_path(self, role: str) -> Optional[str]:
        return self.inputs.get(role)

    def param(self, name: str, default: Any = None) -> Any:
        value = self.params.get(name)
        return default if value is None else value
