"""
Various utilities used in the main code.
NOTE: there should be no autograd functions here, only plain numpy/scipy
"""

import numpy as np
from scipy.special import logsumexp


def get_value(x):
    """
    This is for when using the 'autograd' backend and you want to detach an
    ArrayBox and just convert it to a numpy array.
    """
    if str(type(x)) == "<class 'autograd.numpy.numpy_boxes.ArrayBox'>":
        return x._value
    else:
        return x


def grad_num(fn, arg, step_size=1e-6):
    """ Numerically differentiate `fn` w.r.t. its argument `arg` with central
    differences.
    `arg` can be a numpy array of arbitrary shape
    `step_size` can be a number or an array of the same shape as `arg` """

    N = arg.size
    shape = arg.shape
    gradient = np.zeros((N, ))

    if np.isscalar(step_size):
        step = step_size * np.ones((N))
    else:
        step = np.asarray(step_size).ravel()

    for i in range(N):
        arg_p = np.array(arg, dtype=np.float64).flatten()
        arg_m = np.array(arg, dtype=np.float64).flatten()
        arg_p[i] += step[i]
        arg_m[i] -= step[i]
        f_p = fn(arg_p.reshape(shape))
        f_m = fn(arg_m.reshape(shape))
        gradient[i] = (f_p - f_m) / (2 * step[i])

    return gradient.reshape(shape)


def rel_error(g_num, g_ref, floor=1e-3):
    """
    Relative l2 error between a numerical and a reference gradient. The
    denominator is floored so that vanishing gradients are compared in
    absolute terms.
    """
    g_num = np.asarray(g_num, dtype=np.float64)
    g_ref = np.asarray(g_ref, dtype=np.float64)
    return np.linalg.norm(g_num - g_ref) / max(np.linalg.norm(g_ref), floor)


def check_seed(seed, name='seed'):
    """
    Return `seed` as a Python int, raising ValueError unless it is a
    nonnegative integer. Booleans and floats are rejected, even integral
    ones.
    """
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"'{name}' must be a nonnegative integer, "
                         f"got {seed!r}")
    if seed < 0:
        raise ValueError(f"'{name}' must be a nonnegative integer, "
                         f"got {seed}")
    return int(seed)


def derive_seed(master_seed, *keys):
    """
    Derive a 64-bit task seed from a master seed and integer keys, e.g.
    ``derive_seed(master_seed, n, rep)``. The result does not depend on the
    order in which tasks are scheduled.
    """
    entropy = check_seed(master_seed, 'master_seed')
    spawn_key = tuple(check_seed(k, 'key') for k in keys)
    ss = np.random.SeedSequence(entropy=entropy, spawn_key=spawn_key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed):
    """
    Counter-based (Philox) random generator keyed by `seed`.
    """
    key = check_seed(seed) % 2**64
    return np.random.Generator(np.random.Philox(key=key))


def log_mean_exp(values):
    """
    Numerically stable log(mean(exp(values))).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("log_mean_exp of an empty array")
    return float(logsumexp(values) - np.log(values.size))


def order_statistic(values, k):
    """
    Return the k-th smallest element (1-based) of `values`.
    """
    values = np.sort(np.asarray(values, dtype=np.float64))
    if k < 1 or k > values.size:
        raise ValueError(f"order statistic {k} out of range for "
                         f"{values.size} values")
    return float(values[k - 1])
