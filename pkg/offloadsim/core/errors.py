fmt_cases = {
    # Args and kwargs
    (True, True): lambda s, a, kw: s.format(*a, **kw),

    # Args but no kwargs
    (True, False): lambda s, a, kw: s.format(*a),

    # Kwargs but no args
    (False, True): lambda s, a, kw: s.format(**kw),

    # Nothing
    (False, False): lambda s, a, kw: s
}


class SimError(Exception):
    """Base class of every error raised by :code:`offloadsim`."""


# -- Graph layout --
class IndexOutOfRange(SimError, IndexError):
    pass


class SelfLoop(SimError, ValueError):
    pass


class MaskConflict(SimError, ValueError):
    pass


class InactiveVertex(SimError, ValueError):
    pass


# -- Partition --
class InactiveStart(SimError, ValueError):
    pass


class EmptyGraph(SimError, ValueError):
    pass


class InsufficientServers(SimError, ValueError):
    pass


# -- Cost model --
class InvalidServerRate(SimError, ValueError):
    pass


class ConstraintViolation(SimError, ValueError):

    def __init__(self, msg, constraint=None):
        super().__init__(msg)
        self.constraint = constraint


class ShapeMismatch(SimError, ValueError):
    pass


# -- Environment / agents --
class AllServersFull(SimError, RuntimeError):
    pass


class EpisodeFinished(SimError, RuntimeError):
    pass


class ArchMismatch(SimError, ValueError):
    pass


class CheckpointError(SimError, ValueError):
    pass


class InsufficientBuffer(SimError, RuntimeError):
    pass


class InsufficientEpisodes(SimError, RuntimeError):
    pass


# -- Data --
class ParseError(SimError, ValueError):
    pass


class CountMismatch(SimError, ValueError):
    pass


class SampleTooLarge(SimError, ValueError):
    pass


class TooManyEdges(SimError, ValueError):
    pass


# -- Harness --
class ConfigError(SimError, ValueError):
    pass


class MissingCheckpoint(SimError, FileNotFoundError):
    pass


class ZeroDistanceWarning(UserWarning):
    """Issued when a user sits exactly on an access point and the distance
    is clamped to the reference distance."""


class Error(object):

    docs_url = 'https://offloadsim.readthedocs.io/en/latest/troubleshooting.html'

    def __init__(self, err_type, msg, url=None):
        self.err_type = err_type
        self.msg = msg
        self.url = url

    def raiseError(self, err_code, *args, **kwargs):

        key = (args != (), kwargs != {})
        msg = err_code + ' ' + fmt_cases[key](self.msg, args, kwargs)

        if self.url is not None:
            msg += "\nMore info: " + self.docs_url + self.url

        if self.err_type is ConstraintViolation:
            raise ConstraintViolation(msg, constraint=kwargs.get('constraint'))

        raise self.err_type(msg)


ERRORS = {

    # -- Graph Layout Errors --
    'GL01.1': Error(IndexOutOfRange, "Edge ({i}, {j}) references a vertex outside [0, {n})", "#gl01"),
    'GL01.2': Error(SelfLoop, "Edge ({i}, {i}) is a self-loop", "#gl01"),
    'GL01.3': Error(ShapeMismatch, "Expected {expected} {what}, got {got}", "#gl01"),
    'GL01.4': Error(IndexOutOfRange, "Cannot place {n} active users in a layout of capacity {capacity}", "#gl01"),
    'GL02.1': Error(MaskConflict, "Cannot {action} slot {i}: its mask bit is {bit}", "#gl02"),
    'GL02.2': Error(MaskConflict, "Edge ({i}, {j}) touches a masked-out vertex", "#gl02"),
    'GL02.3': Error(ValueError, "Unknown event kind {kind}", "#gl02"),
    'GL03.1': Error(InactiveVertex, "Vertex {i} is not active", "#gl03"),

    # -- Partition Errors --
    'PA01.1': Error(InactiveStart, "Start vertex {i} is masked out or already assigned", "#pa01"),
    'PA02.1': Error(EmptyGraph, "The layout has no active vertices", "#pa02"),
    'PA03.1': Error(InsufficientServers, "At least 2 servers are needed, got {n}", "#pa03"),
    'PA03.2': Error(ValueError, "Edge weights must be positive integers, got {w} on ({i}, {j})", "#pa03"),
    'PA04.1': Error(ValueError, "Vertex {i} appears in more than one subgraph", "#pa04"),
    'PA04.2': Error(ValueError, "Subgraph {c} is empty", "#pa04"),

    # -- Cost Model Errors --
    'CM01.1': Error(ValueError, "Scenario field {field} must be strictly positive", "#cm01"),
    'CM01.2': Error(ShapeMismatch, "Scenario field {field} has shape {got}, expected {expected}", "#cm01"),
    'CM02.1': Error(InvalidServerRate, "Server {k} has processing rate {rate}, must be > 0", "#cm02"),
    'CM03.1': Error(ConstraintViolation, "Constraint {constraint} violated: {detail}", "#cm03"),
    'CM04.1': Error(ShapeMismatch, "Cannot propagate: {detail}", "#cm04"),
    'CM05.1': Error(ValueError, "Unknown GNN model {model}", "#cm05"),
    'CM06.1': Error(IndexOutOfRange, "User {i} is assigned to server {k}, there are {m} servers", "#cm06"),

    # -- Environment Errors --
    'EN01.1': Error(AllServersFull, "No server has remaining capacity", "#en01"),
    'EN02.1': Error(EpisodeFinished, "Every user has been offloaded, reset the environment", "#en02"),
    'EN03.1': Error(IndexOutOfRange, "Agent {m} does not exist, there are {n} agents", "#en03"),
    'EN04.1': Error(ValueError, "The partition does not cover the active users of the layout", "#en04"),

    # -- Network Errors --
    'NN01.1': Error(ShapeMismatch, "Expected input of width {expected}, got {got}", "#nn01"),
    'NN02.1': Error(ArchMismatch, "Networks have dims {a} and {b}", "#nn02"),
    'NN03.1': Error(CheckpointError, "{path} is not a network checkpoint", "#nn03"),

    # -- Agent Errors --
    'AG01.1': Error(InsufficientBuffer, "Replay buffer holds {size} transitions, batch needs {batch}", "#ag01"),
    'AG02.1': Error(InsufficientEpisodes, "The policy has not been trained yet", "#ag02"),

    # -- Data Errors --
    'DI01.1': Error(ParseError, "{path}:{line}: {detail}", "#di01"),
    'DI01.2': Error(CountMismatch, "{path}: header declares {declared} {what}, found {found}", "#di01"),
    'DI02.1': Error(SampleTooLarge, "Cannot sample {n} documents from a graph of {total}", "#di02"),
    'DI03.1': Error(TooManyEdges, "A simple graph on {n} vertices has at most {limit} edges, asked for {m}", "#di03"),

    # -- Harness Errors --
    'HA01.1': Error(ConfigError, "line {line}: unknown key {key}", "#ha01"),
    'HA01.2': Error(ConfigError, "line {line}: bad value for {key}: {detail}", "#ha01"),
    'HA01.3': Error(ConfigError, "line {line}: expected 'key = value'", "#ha01"),
    'HA01.4': Error(ConfigError, "{key}: {detail}", "#ha01"),
    'HA02.1': Error(MissingCheckpoint, "No {method} checkpoint under {path}", "#ha02"),
}


def raiseError(err_code, *args, **kwargs):

    if err_code not in ERRORS:
        raise RuntimeError('Unknown Error code: ' + err_code)

    ERRORS[err_code].raiseError(err_code, *args, **kwargs)
