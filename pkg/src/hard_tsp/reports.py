"""Report artifacts: DOT support graphs, sidecar metadata, CSV summaries, runtime plots and the runtime regression."""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from .core import EdgeVector, TspInstance, edge_endpoints
from .errors import DimensionMismatchError, ParameterError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

INTEGRAL_TOL = 1e-6

# best-known gaps over all metric instances of the given size
ALPHA_STAR = {10: 1.176, 20: 1.246}

SUMMARY_COLUMNS = (
    'name', 'n', 'gap_c0', 'gap_cstar', 'alpha_star',
    'runtime_mean_c0', 'runtime_stddev_c0', 'runtime_mean_cstar', 'runtime_stddev_cstar',
    'nodes_median_c0', 'nodes_median_cstar', 'support_preserved', 'gap_regression', 'ihopt_status',
)


def _format_cost(value) -> str:
    value = float(value)
    return str(int(value)) if value == int(value) else f"{value:.6g}"


def export_dot(inst: TspInstance, x: EdgeVector, name: Optional[str] = None) -> str:
    """Support graph of ``x`` as an undirected DOT graph.

    Edges with ``x_e = 1`` are solid, edges with ``0 < x_e < 1`` dashed and
    edges with ``x_e = 0`` omitted. Every edge is labelled with its cost.
    Nodes and edges appear in index order.
    """
    if x.n != inst.n:
        raise DimensionMismatchError(f"x has n={x.n}, instance has n={inst.n}")
    graph_name = (name or inst.name or "support").replace('"', "'")
    lines = [f'graph "{graph_name}" {{', "  node [shape=circle];"]
    lines += [f"  {v};" for v in range(inst.n)]
    rows, cols = edge_endpoints(inst.n)
    for e, (i, j) in enumerate(zip(rows, cols)):
        value = float(x.values[e])
        if value <= INTEGRAL_TOL:
            continue
        style = "solid" if value >= 1.0 - INTEGRAL_TOL else "dashed"
        lines.append(f'  {i} -- {j} [label="{_format_cost(inst.costs[e])}", style={style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_sidecar(path: PathLike, metadata: Mapping[str, Any]) -> Path:
    """Write ``key: value`` lines, keys sorted; values must be single-line."""
    path = Path(path)
    lines = []
    for key in sorted(metadata):
        value = metadata[key]
        text = "" if value is None else str(value)
        if "\n" in text or ":" in str(key):
            raise ParameterError(f"sidecar entry {key!r} is not a single-line key: value pair")
        lines.append(f"{key}: {text}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_sidecar(path: PathLike) -> Dict[str, str]:
    """Parse a sidecar; values come back as strings, ``#`` lines are comments."""
    record: Dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ParameterError(f"malformed sidecar line {line!r}")
        record[key.strip()] = value.strip()
    return record


def summary_row(outcome) -> Dict[str, Any]:
    """One summary row from a ``HardenOutcome``."""
    before, after = outcome.before, outcome.after
    return {
        'name': outcome.hard.name,
        'n': outcome.hard.n,
        'gap_c0': round(before.gap, 6),
        'gap_cstar': round(after.gap, 6),
        'alpha_star': ALPHA_STAR.get(outcome.hard.n, ""),
        'runtime_mean_c0': before.hardness.mean_runtime,
        'runtime_stddev_c0': before.hardness.stddev_runtime,
        'runtime_mean_cstar': after.hardness.mean_runtime,
        'runtime_stddev_cstar': after.hardness.stddev_runtime,
        'nodes_median_c0': before.hardness.median_nodes,
        'nodes_median_cstar': after.hardness.median_nodes,
        'support_preserved': outcome.support_preserved,
        'gap_regression': outcome.gap_regression,
        'ihopt_status': outcome.ihopt.status,
    }


def write_summary_csv(path: PathLike, rows: Iterable[Mapping[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def plot_runtime_histogram(before: Sequence[float], after: Sequence[float], path: PathLike,
                           bins: int = 20, title: str = "Exact solver runtime") -> Path:
    """Overlaid runtime histograms of the source and hardened instances, saved to ``path``."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.concatenate([np.asarray(before, dtype=float), np.asarray(after, dtype=float)])
    if values.size == 0:
        raise ParameterError("no runtimes to plot")
    edges = np.histogram_bin_edges(values, bins=bins)

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.hist(before, bins=edges, alpha=0.6, label="source")
    ax.hist(after, bins=edges, alpha=0.6, label="hardened")
    ax.set_xlabel("runtime (s)")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    logger.info("wrote runtime histogram %s", path)
    return path


@dataclass(frozen=True)
class RegressionFit:
    """Least squares line through ``(n, log10 runtime)``."""

    slope: float
    intercept: float
    residuals: Tuple[float, ...]

    def predict(self, n: float) -> float:
        """Predicted runtime in seconds."""
        return float(10 ** (self.intercept + self.slope * n))

    def to_dict(self) -> Dict[str, Any]:
        return {'slope': self.slope, 'intercept': self.intercept, 'residuals': list(self.residuals)}


def fit_runtime_regression(records: Sequence[Tuple[float, float]]) -> RegressionFit:
    """Fit ``log10(runtime) = intercept + slope * n``.

    Raises:
        ParameterError: With fewer than two distinct ``n`` or a nonpositive runtime
    """
    data = np.asarray(records, dtype=float).reshape(-1, 2)
    ns, runtimes = data[:, 0], data[:, 1]
    if np.unique(ns).size < 2:
        raise ParameterError("regression needs at least two distinct n values")
    if np.any(runtimes <= 0):
        raise ParameterError("runtimes must be positive for a log fit")
    y = np.log10(runtimes)
    fit = stats.linregress(ns, y)
    residuals = y - (fit.intercept + fit.slope * ns)
    logger.debug("runtime regression slope=%.6f intercept=%.6f r=%.4f", fit.slope, fit.intercept, fit.rvalue)
    return RegressionFit(float(fit.slope), float(fit.intercept), tuple(float(r) for r in residuals))


def read_runtime_records(path: PathLike) -> List[Tuple[float, float]]:
    """``(n, runtime)`` pairs from a CSV with ``n`` and ``runtime`` columns."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [(float(row['n']), float(row['runtime'])) for row in csv.DictReader(fh)]
