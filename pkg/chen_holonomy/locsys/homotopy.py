from __future__ import annotations

import logging

from chen_holonomy.ainfty.model import TensorChain
from chen_holonomy.ainfty.transformation import HomotopyTransformation
from chen_holonomy.forms.model import HomForm, PolyMap
from chen_holonomy.locsys.flatness import pullback_superconnection
from chen_holonomy.locsys.holonomy import HolonomyResult, holonomy_iso
from chen_holonomy.locsys.model import Superconnection

LOGGER = logging.getLogger(__name__)


def homotopy_holonomy(h: PolyMap, system: Superconnection) -> HolonomyResult:
    """hol_0: the isomorphism f^*S -> g^*S given by transport along h^*S"""
    return holonomy_iso(pullback_superconnection(system, h))


def hol_transformation(h: PolyMap, chain: TensorChain) -> HomForm:
    """hol_n of the homotopy h on a chain of systems and morphisms over R^p"""
    LOGGER.debug("hol_%s along a homotopy out of R^%s", chain.n, h.domain_dim)
    return HomotopyTransformation(h).evaluate(chain)
