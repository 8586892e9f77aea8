from .instance import (ProblemInstance, SaddleObjective, SampleSet,
                       TheoreticalConstants, sample, population_loss,
                       population_grads, theoretical_constants)
from .matrix_game import MatrixGame
from .auc import AucSaddle
from .verify import (AssumptionReport, verify_assumptions, gradient_check,
                     autograd_gradients)


def from_config(spec):
    """
    Build a ProblemInstance from a JSON-style dict.

    A matrix game is given either explicitly
        {"type": "matrix_game", "matrices": [...], "probs": [...],
         "lambda_x": 2, "lambda_y": 2, "truncation_L": 3}
    or as a random draw
        {"type": "matrix_game", "dim": 3, "num_atoms": 3, "seed": 0, ...}.
    An AUC instance likewise takes "features", "labels", "probs" or "dim",
    "num_atoms", "p", "seed", together with "beta", "radius" and "box".
    """
    if not isinstance(spec, dict):
        raise ValueError("Instance spec must be a JSON object")
    spec = dict(spec)
    kind = spec.pop('type', None)
    if kind == 'matrix_game':
        common = {
            key: spec.pop(key)
            for key in ['lambda_x', 'lambda_y', 'truncation_L']
            if key in spec
        }
        if 'matrices' in spec:
            matrices = spec.pop('matrices')
            probs = spec.pop('probs', None)
            if probs is None:
                probs = [1. / len(matrices)] * len(matrices)
            _check_leftover(spec, kind)
            return MatrixGame(matrices, probs, **common)
        if 'dim' not in spec:
            raise ValueError("Matrix game spec needs 'matrices' or 'dim'")
        keys = ['dim', 'num_atoms', 'seed', 'base_scale', 'noise_scale',
                'probs']
        kwargs = {key: spec.pop(key) for key in keys if key in spec}
        _check_leftover(spec, kind)
        return MatrixGame.random(**kwargs, **common)
    elif kind == 'auc':
        common = {
            key: spec.pop(key)
            for key in ['beta', 'radius', 'box'] if key in spec
        }
        if 'features' in spec:
            features = spec.pop('features')
            labels = spec.pop('labels')
            probs = spec.pop('probs')
            p = spec.pop('p', None)
            _check_leftover(spec, kind)
            return AucSaddle(features, labels, probs, p=p, **common)
        if 'dim' not in spec:
            raise ValueError("AUC spec needs 'features' or 'dim'")
        keys = ['dim', 'num_atoms', 'p', 'seed', 'separation', 'spread']
        kwargs = {key: spec.pop(key) for key in keys if key in spec}
        _check_leftover(spec, kind)
        return AucSaddle.random(**kwargs, **common)
    raise ValueError(f"Unknown instance type '{kind}', expected "
                     "'matrix_game' or 'auc'")


def _check_leftover(spec, kind):
    if spec:
        raise ValueError(f"Unknown field(s) {sorted(spec)} in '{kind}' "
                         "instance spec")
