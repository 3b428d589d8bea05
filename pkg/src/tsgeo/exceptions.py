"""Exception hierarchy. Everything raised deliberately by tsgeo derives from TsgeoError."""


class TsgeoError(Exception):
    pass


class IngestError(TsgeoError):
    pass


class InvalidTargetError(TsgeoError, ValueError):
    """Requested downsample size cannot be realised by a bucketing."""


class InvalidWindowError(TsgeoError, ValueError):
    pass


class DegenerateCloudError(TsgeoError, ValueError):
    """All points coincide, so there is no scale to sweep."""


class ComplexityCapError(TsgeoError):
    def __init__(self, count, cap):
        self.count = count
        self.cap = cap
        super().__init__(
            f"Rips complex would hold {count} simplices (cap {cap}); "
            "reduce the chunk length / resolution or the filtration radius"
        )


class OracleScaleError(TsgeoError, ValueError):
    pass


class EigensolverError(TsgeoError):
    pass


class ArchitectureError(TsgeoError, ValueError):
    pass


class DivergenceError(TsgeoError):
    pass


class UndefinedMetricError(TsgeoError, ValueError):
    pass


class ConfigError(TsgeoError, ValueError):
    pass
