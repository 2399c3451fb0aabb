import hashlib
from collections.abc import Iterable

# Normalization tolerance for user data, and for construction arithmetic.
INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12


def validate_item(validator_list, name, item):
    """
    Validate an item across a set of validators. A name should be passed
    through representing the entire search path of the object, to make
    debugging bad input files easier. For example, a value "masses" in a
    dict "pz" should have a name value of "pz.masses".
    """
    if not isinstance(validator_list, Iterable):
        validator_list = [validator_list]

    # Iterate through all validators
    for validator in validator_list:
        # Check to make sure input is valid
        opt_value = validator.validate(name, item)
        if opt_value is not None:
            item = opt_value

    return item


def derive_seed(master, *parts):
    """
    Derive an independent 63-bit seed from a master seed and any further
    labels (replication index, spec name). Same inputs give the same seed on
    every platform, so replications can run in any order.
    """
    text = ":".join(str(p) for p in (master,) + parts)
    digest = hashlib.sha256(text.encode("utf8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def snap(value, tol=INTERNAL_TOL):
    """Round construction noise below `tol` to an exact zero."""
    return 0.0 if abs(value) <= tol else float(value)
