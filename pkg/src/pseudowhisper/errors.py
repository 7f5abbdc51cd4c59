"""Exception hierarchy shared by every module."""


class PseudoWhisperError(Exception):
    pass


class MalformedContainer(PseudoWhisperError, ValueError):
    pass


class UnsupportedEncoding(PseudoWhisperError, ValueError):
    pass


class EmptyAudio(PseudoWhisperError, ValueError):
    pass


class IoFailure(PseudoWhisperError, OSError):
    pass


class InvalidRate(PseudoWhisperError, ValueError):
    pass


class DegenerateGrid(PseudoWhisperError, ValueError):
    pass


class GridMismatch(PseudoWhisperError, ValueError):
    pass


class SingularAutocorrelation(PseudoWhisperError, ArithmeticError):
    pass


class UnstableModel(PseudoWhisperError, ValueError):
    pass


class NonPositiveEnvelope(PseudoWhisperError, ValueError):
    pass


class FrameTooShort(PseudoWhisperError, ValueError):
    pass


class EmptyClip(PseudoWhisperError, ValueError):
    pass


class WindowTooNarrow(PseudoWhisperError, ValueError):
    pass


class InvalidFactor(PseudoWhisperError, ValueError):
    pass


class TooShort(PseudoWhisperError, ValueError):
    pass


class SilentClip(PseudoWhisperError, ValueError):
    pass


class NoPeakFound(PseudoWhisperError, ValueError):
    pass


class ManifestParseError(PseudoWhisperError, ValueError):
    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConfigError(PseudoWhisperError, ValueError):
    pass
