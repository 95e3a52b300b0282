from chen_holonomy.forms.calculus import (
    block_embed_form,
    block_extract_form,
    contract_dt,
    eval_at_point,
    exterior_d,
    pullback_map,
    restrict_t,
    wedge,
)
from chen_holonomy.forms.model import (
    DT,
    ONE,
    ExteriorValue,
    FormMonomial,
    HomForm,
    PolyMap,
    dx,
)

__all__ = [
    "DT",
    "ONE",
    "ExteriorValue",
    "FormMonomial",
    "HomForm",
    "PolyMap",
    "block_embed_form",
    "block_extract_form",
    "contract_dt",
    "dx",
    "eval_at_point",
    "exterior_d",
    "pullback_map",
    "restrict_t",
    "wedge",
]
