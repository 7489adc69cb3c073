"""Small dense networks with hand written backpropagation, the Adam optimiser,
soft target updates and checkpoint files."""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import raiseError


log = logging.getLogger(__name__)

IDENTITY = 'identity'
SIGMOID = 'sigmoid'
RELU = 'relu'

ACTIVATION_CODES = {IDENTITY: 0, SIGMOID: 1, RELU: 2}

MAGIC = b'OSNN'


def sigmoid(z):
    # Split by sign so neither branch overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1. / (1. + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1. + ez)

    return out


def _activate(kind, z):

    if kind == RELU:
        return np.maximum(z, 0.)

    if kind == SIGMOID:
        return sigmoid(z)

    return z


def _activate_grad(kind, z, a, grad):

    if kind == RELU:
        return grad * (z > 0)

    if kind == SIGMOID:
        return grad * a * (1. - a)

    return grad


class Mlp(object):
    """A multilayer perceptron with ReLU hidden layers.

    :param dims: Layer widths :code:`(input, hidden..., output)`.
    :param output: Output activation, :code:`identity` or :code:`sigmoid`.
    :param seed: Seeds the Glorot uniform initialisation, biases start at 0.
    """

    def __init__(self, dims, output=IDENTITY, seed=0):

        if output not in ACTIVATION_CODES:
            raise ValueError("Unknown activation {}".format(output))

        self.dims = tuple(int(d) for d in dims)
        self.output = output

        rng = np.random.default_rng(seed)
        self.weights = []
        self.biases = []

        for fan_in, fan_out in zip(self.dims[:-1], self.dims[1:]):
            limit = np.sqrt(6. / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def __repr__(self):
        return "Mlp({}, output={})".format(list(self.dims), self.output)

    def __call__(self, x):
        return self.forward(x)[0]

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def params(self):
        """Parameters in the order :code:`W0, b0, W1, b1, ...`."""
        params = []
        for W, b in zip(self.weights, self.biases):
            params.extend((W, b))

        return params

    def n_params(self):
        return sum(p.size for p in self.params)

    def copy(self):
        net = Mlp.__new__(Mlp)
        net.dims = self.dims
        net.output = self.output
        net.weights = [W.copy() for W in self.weights]
        net.biases = [b.copy() for b in self.biases]

        return net

    def forward(self, x):
        """
        Evaluate the network.

        Parameters
        ----------
        x: numpy.ndarray
            A single input of shape :code:`(d,)` or a batch :code:`(B, d)`

        Returns
        -------
        out: numpy.ndarray
            Output with the batch dimension of the input
        cache: list
            What :py:meth:`backward` needs
        """

        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dims[0],):
            raiseError("NN01.1", expected=self.dims[0], got=x.shape)

        single = x.ndim == 1
        a = np.atleast_2d(x)
        cache = []

        for n, (W, b) in enumerate(zip(self.weights, self.biases)):
            kind = self.output if n == self.n_layers - 1 else RELU
            z = a @ W + b
            out = _activate(kind, z)

            cache.append((a, z, out, kind))
            a = out

        return (a[0] if single else a), (single, cache)

    def backward(self, cache, grad_out):
        """
        Backpropagate :code:`grad_out`, the gradient of a loss with respect to
        the output of the matching :py:meth:`forward` call.

        Returns
        -------
        grads: list
            Gradients in the order of :py:attr:`params`
        grad_in: numpy.ndarray
            Gradient with respect to the input
        """

        single, layers = cache
        grad = np.atleast_2d(np.asarray(grad_out, dtype=float))

        expected = layers[-1][2].shape
        if grad.shape != expected:
            raiseError("NN01.1", expected=expected, got=grad.shape)

        grads = []
        for W, (a, z, out, kind) in zip(reversed(self.weights), reversed(layers)):
            dz = _activate_grad(kind, z, out, grad)

            grads.append(dz.sum(axis=0))
            grads.append(a.T @ dz)
            grad = dz @ W.T

        grads.reverse()
        return grads, (grad[0] if single else grad)

    def flat(self):
        return np.concatenate([p.ravel() for p in self.params])

    def set_flat(self, values):

        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_params(),):
            raiseError("NN01.1", expected=self.n_params(), got=values.shape)

        offset = 0
        for p in self.params:
            p[...] = values[offset:offset + p.size].reshape(p.shape)
            offset += p.size


@dataclass
class OptimState(object):
    """Adam moment estimates for every parameter of one network."""

    m: list
    v: list
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0

    @classmethod
    def for_net(cls, net, lr=3e-4, **kwargs):
        return cls([np.zeros_like(p) for p in net.params],
                   [np.zeros_like(p) for p in net.params],
                   lr=lr, **kwargs)


def adam_step(net, grads, opt):
    """Take one bias corrected Adam step against :code:`grads`, in place."""

    params = net.params
    if len(grads) != len(params):
        raiseError("NN01.1", expected=len(params), got=len(grads))

    opt.step += 1
    correct1 = 1. - opt.beta1 ** opt.step
    correct2 = 1. - opt.beta2 ** opt.step

    for p, g, m, v in zip(params, grads, opt.m, opt.v):

        if g.shape != p.shape:
            raiseError("NN01.1", expected=p.shape, got=g.shape)

        m *= opt.beta1
        m += (1. - opt.beta1) * g
        v *= opt.beta2
        v += (1. - opt.beta2) * g * g

        p -= opt.lr * (m / correct1) / (np.sqrt(v / correct2) + opt.eps)

    return net, opt


def soft_update(target, source, tau):
    """Blend :code:`target` towards :code:`source`,
    :math:`\\theta' \\leftarrow \\tau\\theta + (1 - \\tau)\\theta'`."""

    if target.dims != source.dims or target.output != source.output:
        raiseError("NN02.1", a=target.dims, b=source.dims)

    for t, s in zip(target.params, source.params):
        t *= (1. - tau)
        t += tau * s

    return target


def save(net, path):
    """
    Write a network to :code:`path`.

    The file holds the magic bytes :code:`OSNN`, the number of layer widths,
    the widths and the output activation code as little endian 32-bit
    unsigned integers, followed by :py:meth:`Mlp.flat` as little endian
    64-bit floats.
    """

    header = [len(net.dims)] + list(net.dims) + [ACTIVATION_CODES[net.output]]

    with open(path, 'wb') as f:
        f.write(MAGIC)
        f.write(np.array(header, dtype='<u4').tobytes())
        f.write(net.flat().astype('<f8').tobytes())

    log.debug("Saved %s to %s", net, path)


def load(path):
    """Read a network written by :py:func:`save`."""

    with open(path, 'rb') as f:
        data = f.read()

    if data[:4] != MAGIC or len(data) < 8:
        raiseError("NN03.1", path=path)

    n_dims = int(np.frombuffer(data, dtype='<u4', count=1, offset=4)[0])
    end = 8 + 4 * (n_dims + 1)

    if n_dims < 2 or len(data) < end:
        raiseError("NN03.1", path=path)

    header = np.frombuffer(data, dtype='<u4', count=n_dims + 1, offset=8)
    dims, code = [int(d) for d in header[:-1]], int(header[-1])

    outputs = {c: name for name, c in ACTIVATION_CODES.items()}
    if code not in outputs:
        raiseError("NN03.1", path=path)

    net = Mlp(dims, output=outputs[code])
    if len(data) - end != 8 * net.n_params():
        raiseError("NN03.1", path=path)

    net.set_flat(np.frombuffer(data, dtype='<f8', offset=end))
    return net
