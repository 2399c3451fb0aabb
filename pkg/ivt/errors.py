class IVTError(Exception):
    """
    Base error class for all errors raised on purpose by ivt. The command
    line driver catches this class and turns it into an exit code, so every
    error raised by a loader, a builder or a test should extend off it.
    """
    pass


class SchemaKeyError(IVTError):
    """
    This error is raised if a document is checked against a schema and a
    required key does not exist.
    """

    def __init__(self, key):
        self.key = key

    def __str__(self):
        return "Expected key %r in document" % self.key


class ValidationError(IVTError):
    """
    This error is raised by `validator.raise_error()` if a validator does
    not find the data to fit the requirements. The key is the full dotted
    path of the value inside its document, e.g. "joint.pz.masses[3]".
    """

    def __init__(self, key, value, validator, message=None, exception=None):
        self.key = key
        self.value = value
        self.message = message
        self.exception = exception
        self._validator = validator

    def __str__(self):
        post = ""
        if self.message is not None:
            post += " (%s)" % self.message
        if self.exception is not None:
            post += " <%r>" % self.exception
        name = getattr(self._validator, "name", type(self._validator).__name__)
        return "%s: %r failed test for %s%s" % (
            self.key, self.value, name, post)


class NormalizationError(ValidationError):
    """
    Masses of a probability measure do not add up to one within the input
    tolerance, or a mass is negative.
    """

    def __init__(self, key, total, message=None):
        super(NormalizationError, self).__init__(
            key, total, None, message=message or "total mass must be 1")

    def __str__(self):
        return "%s: total mass %r is not a probability (%s)" % (
            self.key, self.value, self.message)


class DegenerateGridError(IVTError):
    """
    The z-grid of a law has too few points for the requested statistic.
    """

    def __init__(self, needed, found):
        self.needed = needed
        self.found = found

    def __str__(self):
        return "Expected at least %d z-grid points, found %d" % (
            self.needed, self.found)


class EmptyBinError(IVTError):
    """
    Raised by discretization when a z-bin receives no observation, so that
    its conditional law is undefined.
    """

    def __init__(self, index, edges):
        self.index = index
        self.edges = edges

    def __str__(self):
        return "z-bin %d [%r, %r) is empty" % (
            self.index, self.edges[0], self.edges[1])


class MarginalMismatchError(IVTError):
    """
    A generator is combined with a joint law whose x-marginals differ from
    the ones the generator was built from.
    """

    def __init__(self, index, distance):
        self.index = index
        self.distance = distance

    def __str__(self):
        return "x-marginal %d differs from the generator's (TV %r)" % (
            self.index, self.distance)


class DomainError(IVTError):
    """
    Base class for refusals which are statements about the data rather than
    about malformed input. The command line maps these to exit code 2.
    """
    pass


class AtomicityError(DomainError):
    """
    An equal-measure split or a dyadic construction met an atom. When the
    refusal comes from a discrete law, `certificate` holds the result of the
    discrete feasibility check (violating x and its excess mass).
    """

    def __init__(self, where, location=None, certificate=None):
        self.where = where
        self.location = location
        self.certificate = certificate

    def __str__(self):
        out = "Atom prevents an exact split in %s" % self.where
        if self.location is not None:
            out += " at %r" % (self.location,)
        if self.certificate is not None:
            out += "; certificate %s" % (self.certificate,)
        return out


class NonInvertibleError(DomainError):
    """
    A generator could not be inverted in z because several z-cells (or none)
    send the queried u-cell to the queried x-cell.
    """

    def __init__(self, x, u, candidates):
        self.x = x
        self.u = u
        self.candidates = list(candidates)

    def __str__(self):
        if not self.candidates:
            return "No z-cell sends u=%r to x=%r" % (self.u, self.x)
        return "z-cells %s all send u=%r to x=%r" % (
            ", ".join(self.candidates), self.u, self.x)


class ExperimentError(IVTError):
    """
    A test failed inside an experiment. Carries the name of the spec and of
    the test being run next to the original error.
    """

    def __init__(self, spec, test, exception):
        self.spec = spec
        self.test = test
        self.exception = exception

    def __str__(self):
        return "%s on spec %r failed: %s" % (self.test, self.spec,
                                             self.exception)


class UsageError(IVTError):
    """
    The command line could not be parsed. Raised instead of letting argparse
    exit, so that usage problems share the exit code of bad input.
    """

    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message
