#!/usr/bin/env python3
"""Scenario configuration: TOML files, the builtin gallery and seeded streams.

The schema is documented in SCENARIOS.md. Unknown keys are rejected so that a
misspelled geometry parameter can never fall back to a default silently.
"""

import copy
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
import pydantic

from almost_complex import (AlmostComplexStructure, conjugated_structure, custom_structure,
                            sheared_structure, standard_structure)
import constants as c
from exceptions import AcxError, ConfigError
import hypersurface
from hypersurface import Hypersurface

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

logger = logging.getLogger(__name__)


class _Section(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra='forbid', frozen=True)


class ScenarioSection(_Section):
    name: str = 'unnamed'
    dim: int = 4
    description: str = ''

    @pydantic.field_validator('dim')
    @classmethod
    def _even_dim(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError(f'dim must be even and at least 4, got {value}')
        return value


class StructureSection(_Section):
    kind: Literal['standard', 'conjugated', 'sheared', 'custom'] = 'standard'
    epsilon: float = 0.05
    s_matrix: Optional[List[List[str]]] = None
    shear: float = 0.1
    entries: Optional[List[List[str]]] = None

    @pydantic.model_validator(mode='after')
    def _entries_for_custom(self) -> 'StructureSection':
        if self.kind == 'custom' and not self.entries:
            raise ValueError("structure kind 'custom' needs 'entries'")
        return self


class SurfaceSection(_Section):
    kind: Literal['sphere', 'plane', 'heisenberg', 'indefinite_quadric', 'ellipsoid', 'custom'] = 'sphere'
    radius: float = 1.0
    axis: Optional[int] = None
    semi_axes: Optional[List[float]] = None
    rho: Optional[str] = None
    scale: float = 1.0
    gradient_floor: float = c.GRADIENT_FLOOR

    @pydantic.model_validator(mode='after')
    def _required_parameters(self) -> 'SurfaceSection':
        if self.kind == 'custom' and not self.rho:
            raise ValueError("surface kind 'custom' needs 'rho'")
        if self.kind == 'ellipsoid' and not self.semi_axes:
            raise ValueError("surface kind 'ellipsoid' needs 'semi_axes'")
        if self.scale == 0:
            raise ValueError('surface scale must be nonzero')
        if self.radius <= 0:
            raise ValueError(f'radius must be positive, got {self.radius}')
        return self


class SamplingSection(_Section):
    box: Tuple[float, float] = (-1.5, 1.5)
    n_points: int = pydantic.Field(20, ge=1)
    n_lambdas: int = pydantic.Field(c.N_LAMBDAS, ge=0)
    seed: int

    @pydantic.field_validator('box')
    @classmethod
    def _ordered_box(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not value[0] < value[1]:
            raise ValueError(f'box must satisfy lo < hi, got {list(value)}')
        return value


class TolerancesSection(_Section):
    tol_acs: float = c.TOL_ACS
    tol_eig: float = c.TOL_EIG
    tol_angle: float = c.TOL_ANGLE
    tol_surface: float = c.TOL_SURFACE
    tol_residual: float = c.TOL_RESIDUAL


class ExpectSection(_Section):
    verdict: Optional[Literal[c.TOTALLY_REAL, c.NOT_TOTALLY_REAL]] = None
    classification: Optional[Literal[c.POSITIVE, c.NEGATIVE, c.INDEFINITE, c.DEGENERATE]] = None


class Scenario(_Section):
    scenario: ScenarioSection = ScenarioSection()
    structure: StructureSection = StructureSection()
    surface: SurfaceSection = SurfaceSection()
    sampling: SamplingSection
    tolerances: TolerancesSection = TolerancesSection()
    expect: ExpectSection = ExpectSection()

    @property
    def name(self) -> str:
        return self.scenario.name

    @property
    def dim(self) -> int:
        return self.scenario.dim

    def with_overrides(self, seed: Optional[int] = None, samples: Optional[int] = None) -> 'Scenario':
        sampling = self.sampling.model_dump()
        if seed is not None:
            sampling['seed'] = seed
        if samples is not None:
            sampling['n_points'] = samples
        try:
            return self.model_copy(update={'sampling': SamplingSection(**sampling)})
        except pydantic.ValidationError as e:
            raise ConfigError(f'Invalid override for {self.name}: {e}') from e

    def build_structure(self) -> AlmostComplexStructure:
        s = self.structure
        try:
            if s.kind == 'standard':
                return standard_structure(self.dim)
            if s.kind == 'conjugated':
                return conjugated_structure(self.dim, s.epsilon, s.s_matrix)
            if s.kind == 'sheared':
                return sheared_structure(self.dim, s.shear)
            return custom_structure(s.entries, self.dim)
        except AcxError as e:
            raise ConfigError(f'[structure] {e}') from e

    def build_surface(self) -> Hypersurface:
        s = self.surface
        try:
            if s.kind == 'sphere':
                surface = hypersurface.sphere(self.dim, s.radius)
            elif s.kind == 'plane':
                surface = hypersurface.plane(self.dim, s.axis)
            elif s.kind == 'heisenberg':
                surface = hypersurface.heisenberg(self.dim)
            elif s.kind == 'indefinite_quadric':
                surface = hypersurface.indefinite_quadric(self.dim)
            elif s.kind == 'ellipsoid':
                surface = hypersurface.ellipsoid(self.dim, s.semi_axes)
            else:
                surface = hypersurface.custom(s.rho, self.dim)
        except AcxError as e:
            raise ConfigError(f'[surface] {e}') from e
        surface.gradient_floor = s.gradient_floor
        surface.tol_surface = self.tolerances.tol_surface
        if s.scale != 1.0:
            surface = surface.scaled(s.scale)
        return surface

    def streams(self) -> Tuple[np.random.Generator, np.random.Generator, np.random.SeedSequence]:
        """Independent streams for surface sampling, the lambda grid and per-point test vectors."""
        sampling, lambdas, pairs = np.random.SeedSequence(self.sampling.seed).spawn(3)
        return np.random.default_rng(sampling), np.random.default_rng(lambdas), pairs

    def describe(self) -> dict:
        return self.model_dump(mode='json')


def lambda_grid(n_lambdas: int, rng: np.random.Generator) -> List[float]:
    """The fixed fiber grid plus n_lambdas log-uniform magnitudes in LAMBDA_RANGE with random signs."""
    lo, hi = np.log(c.LAMBDA_RANGE[0]), np.log(c.LAMBDA_RANGE[1])
    magnitudes = np.exp(rng.uniform(lo, hi, n_lambdas))
    signs = rng.choice([-1.0, 1.0], n_lambdas)
    return [float(v) for v in c.LAMBDA_GRID] + [float(v) for v in signs * magnitudes]


def scenario_from_dict(data: dict, source: str = '<dict>') -> Scenario:
    try:
        scenario = Scenario.model_validate(data)
    except pydantic.ValidationError as e:
        raise ConfigError(f'Invalid scenario {source}: {e}') from e
    for section in ('structure', 'surface'):
        # Building once surfaces parse and dimension errors as configuration errors.
        getattr(scenario, f'build_{section}')()
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with path.open('rb') as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f'Cannot read scenario file {path}: {e}') from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f'Scenario file {path} is not valid TOML: {e}') from e
    logger.debug('Loaded scenario file %s', path)
    return scenario_from_dict(data, str(path))


_SPHERE_BOX = {'box': [-1.5, 1.5], 'n_points': 250, 'seed': 20240501}

BUILTINS = {
    'sphere-std': {
        'scenario': {'name': 'sphere-std', 'dim': 4,
                     'description': 'Unit sphere in C^2 with the standard structure'},
        'structure': {'kind': 'standard'},
        'surface': {'kind': 'sphere', 'radius': 1.0},
        'sampling': _SPHERE_BOX,
        'expect': {'verdict': c.TOTALLY_REAL, 'classification': c.POSITIVE},
    },
    'plane-flat': {
        'scenario': {'name': 'plane-flat', 'dim': 4,
                     'description': 'Levi-flat hyperplane y2 = 0; the conormal bundle is not totally real'},
        'structure': {'kind': 'standard'},
        'surface': {'kind': 'plane', 'axis': 4},
        'sampling': {'box': [-1.0, 1.0], 'n_points': 50, 'seed': 20240502},
        'expect': {'verdict': c.NOT_TOTALLY_REAL, 'classification': c.DEGENERATE},
    },
    'heisenberg': {
        'scenario': {'name': 'heisenberg', 'dim': 4,
                     'description': 'Quadric |z1|^2 - y2 = 0'},
        'structure': {'kind': 'standard'},
        'surface': {'kind': 'heisenberg'},
        'sampling': {'box': [-1.0, 1.0], 'n_points': 100, 'seed': 20240503},
        'expect': {'verdict': c.TOTALLY_REAL, 'classification': c.POSITIVE},
    },
    'indefinite-quadric': {
        'scenario': {'name': 'indefinite-quadric', 'dim': 6,
                     'description': 'y3 + |z1|^2 - |z2|^2 = 0 in C^3: contact, Levi form of mixed signature'},
        'structure': {'kind': 'standard'},
        'surface': {'kind': 'indefinite_quadric'},
        'sampling': {'box': [-0.5, 0.5], 'n_points': 50, 'seed': 20240504},
        'expect': {'verdict': c.TOTALLY_REAL, 'classification': c.INDEFINITE},
    },
    'sphere-perturbed-0.05': {
        'scenario': {'name': 'sphere-perturbed-0.05', 'dim': 4,
                     'description': 'Unit sphere with a non-integrable conjugated structure'},
        'structure': {'kind': 'conjugated', 'epsilon': 0.05},
        'surface': {'kind': 'sphere', 'radius': 1.0},
        'sampling': dict(_SPHERE_BOX, seed=20240505),
        'expect': {'verdict': c.TOTALLY_REAL, 'classification': c.POSITIVE},
    },
    'ellipsoid-std': {
        'scenario': {'name': 'ellipsoid-std', 'dim': 4,
                     'description': 'Ellipsoid with semi-axes 1, 1.25, 1.5, 2'},
        'structure': {'kind': 'standard'},
        'surface': {'kind': 'ellipsoid', 'semi_axes': [1.0, 1.25, 1.5, 2.0]},
        'sampling': {'box': [-2.5, 2.5], 'n_points': 100, 'seed': 20240506},
        'expect': {'verdict': c.TOTALLY_REAL, 'classification': c.POSITIVE},
    },
    'sphere-sheared': {
        'scenario': {'name': 'sphere-sheared', 'dim': 4,
                     'description': 'Unit sphere with the pullback of the standard structure by a shear'},
        'structure': {'kind': 'sheared', 'shear': 0.1},
        'surface': {'kind': 'sphere', 'radius': 1.0},
        'sampling': {'box': [-1.5, 1.5], 'n_points': 100, 'seed': 20240507},
        'expect': {'verdict': c.TOTALLY_REAL, 'classification': c.POSITIVE},
    },
}


def builtin_scenario(name: str) -> Scenario:
    if name not in BUILTINS:
        raise ConfigError(f"Unknown builtin scenario '{name}', choose from {', '.join(BUILTINS)}")
    return scenario_from_dict(copy.deepcopy(BUILTINS[name]), name)


def resolve_scenario(ref: str) -> Scenario:
    """A builtin name or the path of a TOML scenario file."""
    if ref in BUILTINS:
        return builtin_scenario(ref)
    return load_scenario(ref)
