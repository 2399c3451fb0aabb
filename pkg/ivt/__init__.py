from . import validators as v
from . import errors as e
from . import measure as m
from . import generator as g
from . import validity as t
from . import simulation as s
from . import codec  # noqa
