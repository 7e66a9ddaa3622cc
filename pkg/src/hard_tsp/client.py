"""Unified hard-TSP client."""

import json
import logging
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from .config import LpLimits, Settings, SolveLimits
from .core import EdgeVector, TspInstance, check_metric
from .errors import ParameterError
from .pipeline import (HardenOutcome, algorithm1_sample_vertices, delta_sweep, evaluate, harden,
                       pipeline_generate, vertex_key)
from .reports import export_dot, summary_row, write_sidecar, write_summary_csv
from .sep import solve_sep
from .tsp import solve_exact
from .tsplib import tsplib_fetch, tsplib_read, tsplib_write

logger = logging.getLogger(__name__)

InstanceSource = Union[str, Path, TspInstance, Mapping[str, Any]]

OPERATIONS = ['evaluate', 'harden', 'sample', 'generate', 'solve', 'sep', 'export_dot', 'sweep']


def to_builtin(value: Any) -> Any:
    """Recursively turn numpy scalars and arrays into JSON-friendly Python values."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def load_instance(source: InstanceSource, name: str = "") -> TspInstance:
    """Build an instance from a TSPLIB path, an instance, or a JSON-style mapping.

    Mappings carry either ``matrix`` (square, symmetric) or ``n`` and ``costs``
    in edge order, plus optional ``name`` and ``integer``.
    """
    if isinstance(source, TspInstance):
        return source
    if isinstance(source, (str, Path)):
        return tsplib_read(source)
    if not isinstance(source, Mapping):
        raise ParameterError(f"cannot build an instance from {type(source).__name__}")

    name = source.get('name', name)
    integer = bool(source.get('integer', False))
    kind = "integer" if integer else "fractional"
    if 'matrix' in source:
        return TspInstance.from_matrix(source['matrix'], name=name, cost_kind=kind)
    if 'costs' in source and 'n' in source:
        return TspInstance(int(source['n']), np.asarray(source['costs']), name=name, cost_kind=kind)
    if 'path' in source:
        return tsplib_read(source['path'])
    raise ParameterError("instance needs 'matrix', 'n' and 'costs', or 'path'")


class HardTspClient:
    """Config-driven entry point over sampling, hardening and evaluation."""

    def __init__(self, load_env: bool = True, settings: Optional[Settings] = None,
                 lp_limits: Optional[LpLimits] = None):
        """Initialize the client.

        Args:
            load_env: Whether to load settings from a .env file
            settings: Explicit settings; read from the environment when omitted
            lp_limits: Simplex tolerances
        """
        self.settings = settings or Settings.from_env(load_env=load_env)
        self.lp_limits = lp_limits or LpLimits()

    @property
    def limits(self) -> SolveLimits:
        return self.settings.limits

    @property
    def out_dir(self) -> Path:
        return Path(self.settings.out_dir)

    def _seed(self, seed: Optional[int]) -> int:
        return self.settings.seed if seed is None else int(seed)

    def solve(self, instance: InstanceSource, cutoff: Optional[float] = None) -> Dict[str, Any]:
        """Exact TOUR of an instance."""
        inst = load_instance(instance)
        result = solve_exact(inst, cutoff, self.limits, dp_threshold=self.settings.dp_threshold,
                             seed=self.settings.seed)
        return to_builtin({'name': inst.name, 'n': inst.n, **result.to_dict()})

    def sep(self, instance: InstanceSource) -> Dict[str, Any]:
        """SUBT and the optimal SEP vertex of an instance."""
        inst = load_instance(instance)
        sol = solve_sep(inst, self.lp_limits)
        return to_builtin({
            'name': inst.name,
            'n': inst.n,
            'subt': sol.value,
            'fractional': sol.fractional,
            'x': sol.x.values,
            'n_cuts_added': sol.n_cuts_added,
            'vertex_key': vertex_key(sol.x),
        })

    def evaluate(self, instance: InstanceSource, reps: Optional[int] = None,
                 seed: Optional[int] = None) -> Dict[str, Any]:
        """Gap and hardness proxy of an instance.

        Args:
            instance: TSPLIB path, instance or mapping
            reps: Branch-and-bound repetitions
            seed: Master seed

        Returns:
            EvaluationReport as a dictionary
        """
        inst = load_instance(instance)
        reps = self.settings.reps if reps is None else int(reps)
        report = evaluate(inst, reps, self._seed(seed), self.limits, self.lp_limits)
        data = report.to_dict()
        data['metric_violations'] = len(check_metric(inst))
        return to_builtin(data)

    def harden_instance(self, instance: InstanceSource, delta: Optional[int] = None, reps: Optional[int] = None,
                        seed: Optional[int] = None) -> HardenOutcome:
        inst = load_instance(instance)
        return harden(
            inst,
            delta=self.settings.delta if delta is None else int(delta),
            limits=self.limits,
            reps=self.settings.reps if reps is None else int(reps),
            seed=self._seed(seed),
            tau=self.settings.tau,
            triangle_k=self.settings.triangle_k,
            lp_limits=self.lp_limits,
        )

    def harden(self, instance: InstanceSource, delta: Optional[int] = None, reps: Optional[int] = None,
               seed: Optional[int] = None) -> Dict[str, Any]:
        """Harden an instance; the result carries the hard cost vector."""
        outcome = self.harden_instance(instance, delta, reps, seed)
        data = outcome.to_dict()
        data['hard'] = {'n': outcome.hard.n, 'costs': outcome.hard.costs, 'integer': True}
        return to_builtin(data)

    def sample(self, n: int, r: int = 1, seed: Optional[int] = None) -> Dict[str, Any]:
        """Sample ``r`` distinct fractional SEP vertices at size ``n``."""
        vertices = algorithm1_sample_vertices(
            int(n), int(r), self._seed(seed), self.settings.burn_in, self.settings.thin,
            self.settings.max_draws, self.lp_limits,
        )
        return to_builtin({
            'n': int(n),
            'seed': self._seed(seed),
            'vertices': [
                {
                    'key': v.key,
                    'draws': v.draws,
                    'costs': v.source.values.values,
                    'x': v.vertex.x.values,
                    'subt': v.vertex.value,
                }
                for v in vertices
            ],
        })

    def generate(self, n: int, r: int, delta: Optional[int] = None, seed: Optional[int] = None,
                 out_dir: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
        """Sample, harden and save a batch; returns the ranked summary."""
        seed = self._seed(seed)
        delta = self.settings.delta if delta is None else int(delta)
        generated = pipeline_generate(
            int(n), int(r), delta, seed, self.limits, self.settings.workers, self.settings.reps,
            self.settings.burn_in, self.settings.thin, self.settings.max_draws, self.settings.tau,
            self.settings.triangle_k,
        )
        target = Path(out_dir) if out_dir is not None else self.out_dir
        rows = []
        for rank, item in enumerate(generated):
            self.save_outcome(item.outcome, target, seed=seed, delta=delta, source_key=item.vertex_key)
            row = summary_row(item.outcome)
            row['rank'] = rank
            rows.append(row)
        write_summary_csv(target / f"summary_n{n}_s{seed}.csv", rows)
        return to_builtin({'n': int(n), 'r': int(r), 'delta': delta, 'seed': seed, 'instances': rows})

    def save_outcome(self, outcome: HardenOutcome, out_dir: Union[str, Path], seed: int, delta: int,
                     source_key: str = "") -> Path:
        """Write the hard instance as TSPLIB with its sidecar record and IH-OPT run log."""
        out_dir = Path(out_dir)
        name = outcome.hard.name
        path = tsplib_write(outcome.hard, out_dir / f"{name}.tsp",
                            comment=f"hardened seed={seed} delta={delta}")
        ihopt = outcome.ihopt
        write_sidecar(out_dir / f"{name}.meta", {
            'name': name,
            'n': outcome.hard.n,
            'seed': seed,
            'delta': delta,
            'source_vertex': source_key or vertex_key(outcome.after.sep_solution.x),
            'gap_c0': f"{outcome.before.gap:.9f}",
            'gap_hopt': f"{outcome.hopt_gap:.9f}",
            'gap_cstar': f"{outcome.after.gap:.9f}",
            'tour': outcome.after.tour_value,
            'subt': f"{outcome.after.subt_value:.9f}",
            'lower_bound': f"{ihopt.lower_bound:.9f}",
            'upper_bound': f"{ihopt.upper_bound:.9f}",
            'status': ihopt.status,
            'certified': ihopt.certified,
            'support_preserved': outcome.support_preserved,
            'gap_regression': outcome.gap_regression,
        })
        with (out_dir / f"{name}.log.jsonl").open("w", encoding="utf-8") as fh:
            for record in ihopt.log:
                fh.write(json.dumps(to_builtin(record.to_dict()), sort_keys=True) + "\n")
        return path

    def export_dot(self, instance: InstanceSource, x: Optional[List[float]] = None) -> str:
        """DOT text for ``x``, or for the instance's own SEP vertex when ``x`` is omitted."""
        inst = load_instance(instance)
        if x is None:
            vector = solve_sep(inst, self.lp_limits).x
        else:
            vector = EdgeVector(inst.n, np.asarray(x, dtype=float))
        return export_dot(inst, vector)

    def sweep(self, instance: InstanceSource, deltas: Optional[List[int]] = None,
              seed: Optional[int] = None) -> List[Dict[str, Any]]:
        inst = load_instance(instance)
        rows = delta_sweep(inst, tuple(deltas) if deltas else (100, 1000, 10000), self.limits,
                           self.settings.reps, self._seed(seed), self.settings.tau, self.settings.triangle_k)
        return to_builtin(rows)

    def fetch(self, name: str, dest: Optional[Union[str, Path]] = None) -> Path:
        """Download a TSPLIB instance into ``dest`` (``<out_dir>/tsplib`` by default)."""
        target = Path(dest) if dest is not None else self.out_dir / "tsplib"
        return tsplib_fetch(name, target, base_url=self.settings.tsplib_base_url)

    def run(self, operation: str, **kwargs) -> Any:
        """Dispatch an operation by name.

        Args:
            operation: One of ``get_available_operations()``
            **kwargs: Operation arguments

        Returns:
            The operation's result
        """
        operation = operation.lower().replace('-', '_')

        if operation == 'evaluate':
            return self.evaluate(**kwargs)
        elif operation == 'harden':
            return self.harden(**kwargs)
        elif operation == 'sample':
            return self.sample(**kwargs)
        elif operation == 'generate':
            return self.generate(**kwargs)
        elif operation == 'solve':
            return self.solve(**kwargs)
        elif operation == 'sep':
            return self.sep(**kwargs)
        elif operation in ['export_dot', 'dot']:
            return self.export_dot(**kwargs)
        elif operation == 'sweep':
            return self.sweep(**kwargs)
        else:
            raise ValueError(
                f"Invalid operation: {operation}. "
                f"Valid operations: {', '.join(OPERATIONS)}"
            )

    def get_available_operations(self) -> List[str]:
        return list(OPERATIONS)

    def get_config_status(self) -> Dict[str, Any]:
        """Current settings and which of them came from the environment.

        Returns:
            Dictionary with ``settings`` and ``from_environment`` maps
        """
        settings = {
            f.name: getattr(self.settings, f.name)
            for f in fields(self.settings)
            if f.name != "from_environment"
        }
        return to_builtin({
            'settings': settings,
            'from_environment': dict(self.settings.from_environment),
            'dotenv_present': os.path.exists('.env'),
        })
