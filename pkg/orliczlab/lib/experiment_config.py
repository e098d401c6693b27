"""
Experiment configurations: everything needed to reproduce a run, echoed
into every JSON report.
"""
import json
from dataclasses import dataclass, field
from typing import List, Optional

from orliczlab import settings
from orliczlab.lib.exceptions import ConfigurationError, OrliczLabError
from orliczlab.lib.exponents import ExponentTuple, ProblemSpec
from orliczlab.lib.witness import WitnessFamily

import logging
logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

OUTPUT_FORMATS = ('csv', 'json')


@dataclass
class ExperimentConfig:
    experiment_id: str = 'experiment'
    spec: Optional[ProblemSpec] = None
    q: Optional[ExponentTuple] = None
    family: Optional[WitnessFamily] = None
    n_range: List[int] = field(default_factory=list)
    seeds: List[int] = field(default_factory=lambda: [0])
    enumeration_budget: int = settings.ENUMERATION_BUDGET
    search_budget: int = settings.SEARCH_BUDGET
    starts: int = settings.ASCENT_STARTS
    tol: float = settings.ASCENT_TOL
    max_sweeps: int = settings.ASCENT_MAX_SWEEPS
    growth_threshold: float = settings.GROWTH_THRESHOLD
    tensors: List[str] = field(default_factory=list)
    seed: int = 0
    check_embedding: bool = False
    classical: bool = False
    output: Optional[str] = None
    output_format: str = 'csv'

    def __post_init__(self):
        if self.q is not None:
            self.q = ExponentTuple(self.q)
        self.n_range = [int(n) for n in self.n_range]
        self.seeds = [int(s) for s in self.seeds]
        self.tensors = [str(t) for t in self.tensors]
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigurationError(
                f"output format must be one of {OUTPUT_FORMATS}, "
                f"got '{self.output_format}'")

    def to_json(self):
        return {
            'experiment_id': self.experiment_id,
            'spec': self.spec.to_json() if self.spec else None,
            'q': self.q.to_json() if self.q else None,
            'family': self.family.to_json() if self.family else None,
            'n_range': self.n_range,
            'seeds': self.seeds,
            'enumeration_budget': self.enumeration_budget,
            'search_budget': self.search_budget,
            'starts': self.starts,
            'tol': self.tol,
            'max_sweeps': self.max_sweeps,
            'growth_threshold': self.growth_threshold,
            'tensors': self.tensors,
            'seed': self.seed,
            'check_embedding': self.check_embedding,
            'classical': self.classical,
            'output': self.output,
            'output_format': self.output_format,
        }

    @classmethod
    def from_json(cls, data):
        """Reads a config, or the config echo of a JSON report."""
        if not isinstance(data, dict):
            raise ConfigurationError("a config must be a JSON object")
        if 'config' in data:
            data = data['config']
            if not isinstance(data, dict):
                raise ConfigurationError("report carries no config echo")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        try:
            if kwargs.get('spec') is not None:
                kwargs['spec'] = ProblemSpec.from_json(kwargs['spec'])
            if kwargs.get('family') is not None:
                kwargs['family'] = WitnessFamily.from_json(kwargs['family'])
            if kwargs.get('q') is not None:
                kwargs['q'] = ExponentTuple(str(q) for q in kwargs['q'])
            for key in ('enumeration_budget', 'search_budget', 'starts',
                        'max_sweeps', 'seed'):
                if key in kwargs:
                    kwargs[key] = int(kwargs[key])
            for key in ('tol', 'growth_threshold'):
                if key in kwargs:
                    kwargs[key] = float(kwargs[key])
            for key in ('check_embedding', 'classical'):
                if not isinstance(kwargs.get(key, False), bool):
                    raise ConfigurationError(f"{key} must be true or false")
            return cls(**kwargs)
        except OrliczLabError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigurationError(f"malformed config: {e}")

    @classmethod
    def load(cls, path):
        with open(path, 'r') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"{path} is not valid JSON: {e}")
        logger.debug(f"config read from {path}")
        return cls.from_json(data)

    def dump(self, path):
        with open(path, 'w') as f:
            json.dump(self.to_json(), f, indent=2)
