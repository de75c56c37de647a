"""Exception hierarchy shared across the package.

Two branches matter for the CLI exit-code mapping: DataError (bad inputs,
manifests, annotations -> exit 3) and ModelError (evaluator failures ->
exit 4).
"""


class PartShapError(Exception):
    """Base class for all partshap errors."""


class DataError(PartShapError):
    """Invalid input data: images, boxes, manifests, histograms."""


class ModelError(PartShapError):
    """A value function could not produce usable logits."""


# coalition-space errors

class PartCountOutOfRange(DataError):
    pass


class SizeOutOfRange(DataError):
    pass


class PartIndexOutOfRange(DataError):
    pass


class InvalidCoalition(DataError):
    pass


# image / masking errors

class EmptyImage(DataError):
    pass


class UnsupportedImageFormat(DataError):
    pass


class BoxOutOfBounds(DataError):
    pass


# value-function errors

class EvaluatorUnavailable(ModelError):
    pass


class MalformedResponse(ModelError):
    pass


class NonFiniteLogit(ModelError):
    pass


class HandshakeFailed(ModelError):
    pass


class ClassCountMismatch(ModelError):
    pass


# aggregation / sanity errors

class ZeroVector(DataError):
    pass


class PartCountMismatch(DataError):
    pass


class VocabularyMismatch(DataError):
    pass


# dataset / CLI errors

class ManifestError(DataError):
    pass


class SampleNotFound(DataError):
    pass


class EmptyDataset(DataError):
    pass


# oracle errors

class TooManyPlayers(DataError):
    pass
