from __future__ import annotations

import json
import logging
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterator, Optional

from chen_holonomy.cli.model import ChainSpec, GaugeSpec, Scenario, ScenarioSchemaError
from chen_holonomy.exactnum.matrix import SparseMatrix
from chen_holonomy.exactnum.poly import MultiPoly, format_rational, parse_rational
from chen_holonomy.forms.model import FormMonomial, HomForm, PolyMap, T, chart_variables
from chen_holonomy.graded.model import Flag, GradedHom, GradedSpace
from chen_holonomy.locsys.model import Superconnection

LOGGER = logging.getLogger(__name__)


@contextmanager
def located(location: str) -> Iterator[None]:
    """turns any decoding failure inside the block into a schema error naming `location`"""
    try:
        yield
    except ScenarioSchemaError:
        raise
    except Exception as e:
        raise ScenarioSchemaError(f"{location}: {e}") from e


def form_variables(m: int) -> tuple[str, ...]:
    return chart_variables(m) + (T,)


def encode_space(space: GradedSpace) -> list[list[int]]:
    return [[k, dim] for k, dim in space.components]


def decode_space(data: Any) -> GradedSpace:
    return GradedSpace(tuple((int(k), int(dim)) for k, dim in data))


def _encode_matrix(matrix: SparseMatrix, encode_entry) -> list[dict]:
    return [{"row": r, "col": c, "value": encode_entry(v)} for r, c, v in matrix.entries()]


def _decode_matrix(data: Any, shape: tuple[int, int], decode_entry) -> SparseMatrix:
    entries = {}
    for entry in data:
        position = (int(entry["row"]), int(entry["col"]))
        if position in entries:
            raise ValueError(f"entry {position} given twice")
        entries[position] = decode_entry(entry["value"])
    return SparseMatrix(shape, entries)


def encode_hom(hom: GradedHom) -> dict:
    return {
        "source": encode_space(hom.source),
        "target": encode_space(hom.target),
        "degree": hom.degree,
        "entries": _encode_matrix(hom.matrix, format_rational),
    }


def decode_hom(data: Any) -> GradedHom:
    source, target = decode_space(data["source"]), decode_space(data["target"])
    shape = (target.total_dim, source.total_dim)
    matrix = _decode_matrix(data["entries"], shape, parse_rational)
    return GradedHom(source, target, int(data["degree"]), matrix)


def encode_form(form: HomForm) -> dict:
    variables = form_variables(form.m)
    return {
        "m": form.m,
        "cylinder": form.cylinder,
        "source": encode_space(form.source),
        "target": encode_space(form.target),
        "variables": list(variables),
        "terms": [
            {
                "dx": list(monomial.dx),
                "dt": monomial.dt,
                "entries": _encode_matrix(matrix, lambda p: p.to_json(variables)),
            }
            for monomial, matrix in sorted(form.terms.items(), key=lambda item: item[0])
        ],
    }


def decode_form(data: Any) -> HomForm:
    m = int(data["m"])
    variables = tuple(data.get("variables", form_variables(m)))
    source, target = decode_space(data["source"]), decode_space(data["target"])
    shape = (target.total_dim, source.total_dim)
    terms: dict[FormMonomial, SparseMatrix] = {}
    for index, term in enumerate(data["terms"]):
        with located(f"terms[{index}]"):
            dx_indices = tuple(int(i) for i in term["dx"])
            monomial = FormMonomial(dx_indices, bool(term.get("dt", False)))
            if monomial in terms:
                raise ValueError(f"monomial {monomial} given twice")
            terms[monomial] = _decode_matrix(
                term["entries"], shape, lambda value: MultiPoly.from_json(value, variables)
            )
    return HomForm(m, source, target, terms, bool(data.get("cylinder", True)))


def encode_system(system: Superconnection) -> dict:
    return {
        "space": encode_space(system.space),
        "flag": system.flag.to_json() if system.flag is not None else None,
        "alpha": encode_form(system.alpha),
    }


def decode_system(data: Any) -> Superconnection:
    space = decode_space(data["space"])
    flag_data = data.get("flag")
    flag = None
    if flag_data is not None:
        flag = Flag(space, tuple(tuple(int(i) for i in layer) for layer in flag_data))
    with located("alpha"):
        alpha = decode_form(data["alpha"])
    return Superconnection(space, alpha, flag)


def encode_chain(chain: ChainSpec) -> dict:
    return {
        "systems": list(chain.systems),
        "xis": [encode_form(xi) for xi in chain.xis],
        "degrees": list(chain.degrees),
    }


def decode_chain(data: Any, systems: list[Superconnection]) -> ChainSpec:
    xis = []
    for index, xi in enumerate(data.get("xis", [])):
        with located(f"xis[{index}]"):
            xis.append(decode_form(xi))
    degrees = data.get("degrees")
    if degrees is None:
        degrees = [xi.total_degree() for xi in xis]
    spec = ChainSpec(tuple(int(i) for i in data["systems"]), tuple(xis), tuple(degrees))
    spec.resolve(systems)
    return spec


def encode_gauge(gauge: GaugeSpec) -> dict:
    return {"system": gauge.system, "beta": encode_system(gauge.beta), "g": encode_form(gauge.g)}


def decode_gauge(data: Any, systems: list[Superconnection]) -> GaugeSpec:
    index = int(data["system"])
    if not 0 <= index < len(systems):
        raise ValueError(f"gauge refers to missing system {index}")
    with located("beta"):
        beta = decode_system(data["beta"])
    with located("g"):
        g = decode_form(data["g"])
    return GaugeSpec(index, beta, g)


def encode_poly_map(f: PolyMap) -> dict:
    variables = chart_variables(f.domain_dim) + ((T,) if f.cylinder else ())
    return {
        "domain_dim": f.domain_dim,
        "cylinder": f.cylinder,
        "variables": list(variables),
        "components": [component.to_json(variables) for component in f.components],
    }


def decode_poly_map(data: Any) -> PolyMap:
    domain_dim, cylinder = int(data["domain_dim"]), bool(data.get("cylinder", False))
    default = chart_variables(domain_dim) + ((T,) if cylinder else ())
    variables = tuple(data.get("variables", default))
    components = tuple(MultiPoly.from_json(c, variables) for c in data["components"])
    return PolyMap(components, domain_dim, cylinder)


def _encode_point(point: Optional[tuple[Fraction, ...]]) -> Optional[list[str]]:
    return None if point is None else [format_rational(x) for x in point]


def encode_scenario(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "m": scenario.m,
        "seed": scenario.seed,
        "systems": [encode_system(s) for s in scenario.systems],
        "chains": [encode_chain(c) for c in scenario.chains],
        "gauges": [encode_gauge(g) for g in scenario.gauges],
        "base_systems": [encode_system(s) for s in scenario.base_systems],
        "base_chains": [encode_chain(c) for c in scenario.base_chains],
        "homotopies": [encode_poly_map(h) for h in scenario.homotopies],
        "point": _encode_point(scenario.point),
    }


def _decode_list(data: dict, key: str, decode) -> list:
    decoded = []
    for index, item in enumerate(data.get(key) or []):
        with located(f"{key}[{index}]"):
            decoded.append(decode(item))
    return decoded


def decode_scenario(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioSchemaError("a scenario is a JSON object")
    with located("scenario"):
        name, m = str(data["name"]), int(data["m"])
    systems = _decode_list(data, "systems", decode_system)
    base_systems = _decode_list(data, "base_systems", decode_system)
    point = data.get("point")
    with located("point"):
        point = None if point is None else tuple(parse_rational(x) for x in point)
    seed = data.get("seed")
    scenario = Scenario(
        name=name,
        m=m,
        systems=systems,
        chains=_decode_list(data, "chains", lambda c: decode_chain(c, systems)),
        gauges=_decode_list(data, "gauges", lambda g: decode_gauge(g, systems)),
        base_systems=base_systems,
        base_chains=_decode_list(data, "base_chains", lambda c: decode_chain(c, base_systems)),
        homotopies=_decode_list(data, "homotopies", decode_poly_map),
        point=point,
        seed=None if seed is None else int(seed),
    )
    LOGGER.debug(
        "decoded scenario %s: %s systems, %s chains", name, len(systems), len(scenario.chains)
    )
    return scenario


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(encode_scenario(scenario), indent=2, sort_keys=True)


def load_scenario(path: Path) -> Scenario:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ScenarioSchemaError(f"cannot read scenario {path}: {e}") from e
    return decode_scenario(data)
