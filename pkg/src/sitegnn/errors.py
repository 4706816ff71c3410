"""Exception types raised across the pipeline."""


class SiteGnnError(Exception):
    """Base class for all pipeline errors."""


# -- graph construction --------------------------------------------------

class DimensionMismatch(SiteGnnError):
    """Feature matrix / node / edge counts disagree."""


class DuplicateFips(SiteGnnError):
    pass


class DuplicateEdge(SiteGnnError):
    pass


class SelfLoop(SiteGnnError):
    pass


class AsymmetricEdgeSet(SiteGnnError):
    pass


class UnknownGroup(SiteGnnError):
    pass


class InvalidNodeId(SiteGnnError):
    pass


# -- ingest ----------------------------------------------------------------

class ParseError(SiteGnnError):
    pass


class SchemaError(SiteGnnError):
    pass


class MissingColumn(SiteGnnError):
    pass


class UnresolvableCell(SiteGnnError):
    """A whole column is missing; no imputation rule applies."""


class DegenerateColumn(SiteGnnError):
    """Constant or too-short column where variation is required."""


# -- connectivity ------------------------------------------------------------

class EmptyFlows(SiteGnnError):
    pass


class ZeroPopulation(SiteGnnError):
    pass


class EmptyTable(SiteGnnError):
    pass


class UnknownFips(SiteGnnError):
    pass


class EmptyKinds(SiteGnnError):
    pass


class InvalidCoordinate(SiteGnnError):
    pass


class EmptyDealerSet(SiteGnnError):
    pass


class TooFewDealers(SiteGnnError):
    pass


# -- tensors / autodiff -----------------------------------------------------

class ShapeMismatch(SiteGnnError):
    pass


class NonFinite(SiteGnnError):
    """NaN or Inf appeared in an operation result."""


class DisconnectedLoss(SiteGnnError):
    """Backward was asked to start from a tensor the tape never produced."""


class InvalidDims(SiteGnnError):
    pass


# -- training / study --------------------------------------------------------

class NoNegatives(SiteGnnError):
    pass


class TooFewPerClass(SiteGnnError):
    pass


class EmptyMask(SiteGnnError):
    pass


class EmptyResults(SiteGnnError):
    pass


class InvalidConfig(SiteGnnError):
    pass


class InvalidMethod(SiteGnnError):
    pass
