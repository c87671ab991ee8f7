"""Exception hierarchy.

Every error raised by the pipeline derives from ``ChatterError``.  The three
intermediate classes map onto CLI exit codes (config 2, data 3, numeric 4).
"""


class ChatterError(Exception):
    exit_code = 1


class ConfigError(ChatterError, ValueError):
    exit_code = 2


class DataError(ChatterError, ValueError):
    exit_code = 3


class NumericError(ChatterError, ArithmeticError):
    exit_code = 4


# ingest
class MissingMetadata(DataError):
    pass


class MalformedCsv(DataError):
    def __init__(self, path, row, message="non-numeric value"):
        self.path = path
        self.row = row
        super().__init__(f"{path}: row {row}: {message}")


class UnknownLabelString(DataError):
    pass


class NonIntegerDecimation(ConfigError):
    pass


class CutoffAboveNyquist(ConfigError):
    pass


class ConstantSignal(NumericError):
    pass


class ChunkLongerThanSignal(DataError):
    pass


# embedding
class NoSignificantFrequency(NumericError):
    pass


class NoMinimumFound(NumericError):
    pass


class TooShort(DataError):
    pass


class SignalTooShort(DataError):
    pass


# persistence
class EmptyCloud(DataError):
    pass


class EmptyInput(DataError):
    pass


# featurize
class DegenerateBounds(NumericError):
    pass


class MeshMissingForK(ConfigError):
    pass


# kernel
class NonPositiveSigma(ConfigError):
    pass


# learn
class SingleClassTrainingSet(DataError):
    pass


class AsymmetricGram(NumericError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyClassAfterSplit(DataError):
    pass


# synth
class InvalidSpec(ConfigError):
    pass
