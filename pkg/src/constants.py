#!/usr/bin/env python3

import numpy as np

EPS = np.finfo(float).eps
# Central differences: h = EPS^(1/3) * max(1, |x_i|); Hessian stencil uses EPS^(1/4).
FD_STEP_GRADIENT = EPS ** (1.0 / 3.0)
FD_STEP_HESSIAN = EPS ** 0.25

TOL_ACS = 1e-10
TOL_EIG = 1e-7
TOL_ANGLE = 1e-7
TOL_SURFACE = 1e-12
TOL_RESIDUAL = 1e-9
TOL_MEMBERSHIP = 1e-9
GRADIENT_FLOOR = 1e-3
LAMBDA_MIN = 1e-6
NEWTON_MAX_STEPS = 50
CORRUPTION_FLOOR = 0.1

# Fixed part of the fiber grid; n_lambdas log-uniform draws in LAMBDA_RANGE are appended.
LAMBDA_GRID = (1.0, -1.0, 0.5, -0.5)
LAMBDA_RANGE = (0.1, 10.0)
N_LAMBDAS = 8
EQ32_PAIRS_PER_RECORD = 2
SAMPLE_ATTEMPTS_PER_POINT = 200

THREADS_ENV = 'ACX_THREADS'

FUNCTIONS = ('sin', 'cos', 'exp', 'ln', 'sqrt')

# Levi classes
POSITIVE = 'StronglyPseudoconvexPositive'
NEGATIVE = 'StronglyPseudoconvexNegative'
INDEFINITE = 'NonDegenerateIndefinite'
DEGENERATE = 'Degenerate'
LEVI_CLASSES = (POSITIVE, NEGATIVE, INDEFINITE, DEGENERATE)

TOTALLY_REAL = 'TotallyReal'
NOT_TOTALLY_REAL = 'NotTotallyReal'
VERDICTS = (TOTALLY_REAL, NOT_TOTALLY_REAL)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

# Agreement required between a coordinate formula and its finite-difference oracle (relative)
TOL_NIJENHUIS_ORACLE = 1e-5
TOL_FD_ORACLE = 1e-6
TOL_CERTIFICATE = 1e-6

MODE_CHECK = 'check'
MODE_NIJENHUIS = 'nijenhuis'
MODE_LEVI = 'levi'
MODE_TOTAL_REALITY = 'total-reality'
MODES = (MODE_CHECK, MODE_NIJENHUIS, MODE_LEVI, MODE_TOTAL_REALITY)

FORMATS = ('human', 'records')
