"""
Backend for the loss and gradient evaluations. Available backends:
 - numpy [default]
 - autograd
A backend can be set with the 'set_backend'
    import ssprisk
    ssprisk.set_backend("autograd")

The instance losses are written against the backend object so that, with
autograd installed, an automatic-differentiation gradient can be compared
with the closed-form gradients. Everything that is not differentiated
(projections, solvers, statistics) stays in plain numpy.
"""

# Numpy must be present
import numpy as np

# Import autograd if available
try:
    import autograd.numpy as npa
    AG_AVAILABLE = True
except ImportError:
    AG_AVAILABLE = False


class Backend(object):
    """
    Backend Base Class
    """
    def __repr__(self):
        return self.__class__.__name__


class NumpyBackend(Backend):
    """ Numpy Backend """

    # methods
    sum = staticmethod(np.sum)
    dot = staticmethod(np.dot)

    # math functions
    log = staticmethod(np.log)


if AG_AVAILABLE:

    class AutogradBackend(Backend):
        """ Autograd Backend """
        # methods
        sum = staticmethod(npa.sum)
        dot = staticmethod(npa.dot)

        # math functions
        log = staticmethod(npa.log)


backend = NumpyBackend()


def set_backend(name):
    """
    Set the backend for the loss evaluations.
    This function monkey-patches the backend object by changing its class.
    This way, all methods of the backend object will be replaced.

    Parameters
    ----------
    name : {'numpy', 'autograd'}
        Name of the backend. HIPS/autograd must be installed to use 'autograd'.
    """
    # perform checks
    if name == 'autograd' and not AG_AVAILABLE:
        raise ValueError("Autograd backend is not available, autograd must \
            be installed.")

    # change backend by monkeypatching
    if name == 'numpy':
        backend.__class__ = NumpyBackend
    elif name == 'autograd':
        backend.__class__ = AutogradBackend
    else:
        raise ValueError(f"unknown backend '{name}'")
