from .link_service import LinkEvaluationService, LinkInputs
from .skin_attenuation import SkinAttenuationTable, load_default_table, load_table

__all__ = [
    "LinkEvaluationService",
    "LinkInputs",
    "SkinAttenuationTable",
    "load_default_table",
    "load_table",
]
