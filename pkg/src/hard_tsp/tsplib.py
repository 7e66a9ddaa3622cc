"""TSPLIB reading, writing and download."""

import gzip
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from .config import DEFAULT_TSPLIB_BASE_URL
from .core import INTEGER, TspInstance, edge_endpoints
from .errors import ParameterError, TsplibFetchError, TsplibParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EXPLICIT_FORMATS = ("FULL_MATRIX", "UPPER_ROW", "LOWER_ROW", "UPPER_DIAG_ROW", "LOWER_DIAG_ROW")
COORD_TYPES = ("EUC_2D", "ATT", "GEO")
SKIPPED_SECTIONS = ("DISPLAY_DATA_SECTION", "FIXED_EDGES_SECTION", "TOUR_SECTION")
GEO_PI = 3.141592
GEO_RADIUS = 6378.388

_SECTION = re.compile(r"^[A-Z_]+_SECTION\b")


def _nint(values: np.ndarray) -> np.ndarray:
    """TSPLIB ``nint``: round half up, not to even."""
    return np.floor(values + 0.5)


def euc_2d(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return _nint(np.sqrt((diff ** 2).sum(axis=2)))


def att(coords: np.ndarray) -> np.ndarray:
    """Pseudo-Euclidean distance of the ATT instances."""
    diff = coords[:, None, :] - coords[None, :, :]
    r = np.sqrt((diff ** 2).sum(axis=2) / 10.0)
    t = _nint(r)
    return np.where(t < r, t + 1, t)


def geo(coords: np.ndarray) -> np.ndarray:
    """Great-circle distance for ``DDD.MM`` latitude/longitude pairs."""
    degrees = np.trunc(coords)
    minutes = coords - degrees
    radians = GEO_PI * (degrees + 5.0 * minutes / 3.0) / 180.0
    lat, lon = radians[:, 0], radians[:, 1]
    q1 = np.cos(lon[:, None] - lon[None, :])
    q2 = np.cos(lat[:, None] - lat[None, :])
    q3 = np.cos(lat[:, None] + lat[None, :])
    inner = np.clip(0.5 * ((1.0 + q1) * q2 - (1.0 - q1) * q3), -1.0, 1.0)
    d = np.floor(GEO_RADIUS * np.arccos(inner) + 1.0)
    np.fill_diagonal(d, 0)
    return d


_DISTANCES = {'EUC_2D': euc_2d, 'ATT': att, 'GEO': geo}


def _explicit_matrix(values: List[float], n: int, fmt: str) -> np.ndarray:
    if fmt == "FULL_MATRIX":
        rows, cols = np.indices((n, n)).reshape(2, -1)
    elif fmt == "UPPER_ROW":
        rows, cols = np.triu_indices(n, 1)
    elif fmt == "UPPER_DIAG_ROW":
        rows, cols = np.triu_indices(n, 0)
    elif fmt == "LOWER_ROW":
        rows, cols = np.tril_indices(n, -1)
    elif fmt == "LOWER_DIAG_ROW":
        rows, cols = np.tril_indices(n, 0)
    else:
        raise TsplibParseError(fmt)

    if len(values) < len(rows):
        raise TsplibParseError("EDGE_WEIGHT_SECTION", f"{fmt} for n={n} needs {len(rows)} weights, got {len(values)}")
    matrix = np.zeros((n, n))
    matrix[rows, cols] = values[:len(rows)]
    if fmt == "FULL_MATRIX":
        if not np.array_equal(matrix, matrix.T):
            raise TsplibParseError("FULL_MATRIX", "asymmetric FULL_MATRIX is not a symmetric TSP")
    else:
        matrix = np.maximum(matrix, matrix.T)
    np.fill_diagonal(matrix, 0)
    return matrix


def parse_tsplib(text: str, default_name: str = "") -> TspInstance:
    """Parse a symmetric TSPLIB problem.

    Args:
        text: File contents
        default_name: Name used when the file has no NAME line

    Returns:
        An integer instance when every weight is integral

    Raises:
        TsplibParseError: Naming the unsupported keyword or value
    """
    header: Dict[str, str] = {}
    coords: List[List[float]] = []
    weights: List[float] = []
    section: Optional[str] = None

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if upper == "EOF":
            break
        match = _SECTION.match(upper)
        if match:
            section = match.group(0)
            if section not in ("NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION") + SKIPPED_SECTIONS:
                raise TsplibParseError(section)
            rest = line[len(section):].strip()
            if rest and section == "EDGE_WEIGHT_SECTION":
                weights.extend(float(tok) for tok in rest.split())
            continue
        if ":" in line and section is None:
            key, value = line.split(":", 1)
            header[key.strip().upper()] = value.strip()
            continue
        if section is None and re.match(r"^[A-Z_]+$", upper.split()[0]):
            key, _, value = line.partition(" ")
            header[key.strip().upper()] = value.strip()
            continue
        if section == "NODE_COORD_SECTION":
            parts = line.split()
            coords.append([float(parts[1]), float(parts[2])])
        elif section == "EDGE_WEIGHT_SECTION":
            weights.extend(float(tok) for tok in line.split())

    problem_type = header.get("TYPE", "TSP").split()[0].upper()
    if problem_type != "TSP":
        raise TsplibParseError(problem_type, f"Only TYPE: TSP is supported, got {problem_type}")
    if "DIMENSION" not in header:
        raise TsplibParseError("DIMENSION", "Missing DIMENSION")
    n = int(header["DIMENSION"])
    weight_type = header.get("EDGE_WEIGHT_TYPE", "").upper()
    name = header.get("NAME", default_name)

    if weight_type == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
        if fmt not in EXPLICIT_FORMATS:
            raise TsplibParseError(fmt)
        matrix = _explicit_matrix(weights, n, fmt)
    elif weight_type in _DISTANCES:
        if len(coords) != n:
            raise TsplibParseError("NODE_COORD_SECTION", f"expected {n} coordinates, got {len(coords)}")
        matrix = _DISTANCES[weight_type](np.asarray(coords))
    else:
        raise TsplibParseError(weight_type or "EDGE_WEIGHT_TYPE")

    rows, cols = edge_endpoints(n)
    costs = matrix[rows, cols]
    if np.all(costs == np.rint(costs)):
        inst = TspInstance(n, costs.astype(np.int64), name=name, cost_kind=INTEGER)
    else:
        inst = TspInstance(n, costs, name=name)
    logger.debug("parsed TSPLIB name=%s n=%d type=%s", name, n, weight_type)
    return inst


def tsplib_read(path: PathLike) -> TspInstance:
    """Read a ``.tsp`` file, gzip-compressed when the name ends in ``.gz``."""
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rt", encoding="utf-8", errors="replace") as fh:
            text = fh.read()
        stem = Path(path.stem).stem
    else:
        text = path.read_text(encoding="utf-8", errors="replace")
        stem = path.stem
    return parse_tsplib(text, default_name=stem)


def format_tsplib(inst: TspInstance, comment: str = "") -> str:
    """EXPLICIT FULL_MATRIX text for an integer instance.

    Raises:
        ParameterError: If the instance is fractional
    """
    if not inst.is_integer:
        raise ParameterError("TSPLIB output needs integer costs; apply scale_and_round first")
    matrix = inst.matrix()
    width = max(len(str(int(matrix.max()))), 1)
    lines = [f"NAME : {inst.name or 'instance'}", "TYPE : TSP"]
    if comment:
        lines.append(f"COMMENT : {comment}")
    lines += [
        f"DIMENSION : {inst.n}",
        "EDGE_WEIGHT_TYPE : EXPLICIT",
        "EDGE_WEIGHT_FORMAT : FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    lines += [" ".join(f"{int(v):>{width}d}" for v in row) for row in matrix]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def tsplib_write(inst: TspInstance, path: PathLike, comment: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_tsplib(inst, comment), encoding="utf-8")
    return path


def create_session() -> requests.Session:
    """Create a requests session with retry logic."""
    session = requests.Session()

    retry_strategy = Retry(
        total=3,
        backoff_factor=1,
        status_forcelist=[429, 500, 502, 503, 504]
    )

    adapter = HTTPAdapter(max_retries=retry_strategy)
    session.mount("http://", adapter)
    session.mount("https://", adapter)

    return session


def tsplib_fetch(name: str, dest: PathLike, base_url: str = DEFAULT_TSPLIB_BASE_URL,
                 session: Optional[requests.Session] = None, timeout: float = 30.0) -> Path:
    """Download ``<name>.tsp.gz`` (or ``<name>.tsp``) into ``dest``.

    Args:
        name: Instance name such as ``gr24``
        dest: Target directory
        base_url: Directory URL of the TSPLIB mirror
        session: Session to reuse
        timeout: Per-request timeout in seconds

    Returns:
        Path of the saved file

    Raises:
        TsplibFetchError: If no candidate URL could be downloaded
    """
    session = session or create_session()
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    errors = []
    for filename in (f"{name}.tsp.gz", f"{name}.tsp"):
        url = f"{base_url.rstrip('/')}/{filename}"
        try:
            response = session.get(url, timeout=timeout)
            response.raise_for_status()
        except requests.exceptions.RequestException as e:
            errors.append(f"{url}: {e}")
            continue
        target = dest / filename
        target.write_bytes(response.content)
        logger.info("fetched %s (%d bytes)", url, len(response.content))
        return target
    raise TsplibFetchError(f"could not download {name}: " + "; ".join(errors))

