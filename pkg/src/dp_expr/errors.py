"""Exception hierarchy.

Three branches drive the CLI exit codes: InputError (bad data or files,
exit 2), NumericalError (quadrature could not deliver, exit 3), and
UsageError (a request the data cannot satisfy, exit 4).
"""


class DpExprError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DpExprError):
    """Invalid input data: parse failures, invariant violations."""


class NumericalError(DpExprError):
    """A numerical routine failed to meet its contract."""


class UsageError(DpExprError):
    """The request is inconsistent with the data or with other options."""


# dataset
class NonPositiveValue(InputError):
    def __init__(self, probe_id, sample_id, value):
        self.probe_id = probe_id
        self.sample_id = sample_id
        self.value = value
        super().__init__(
            f"non-positive expression value {value!r} at probe {probe_id!r}, "
            f"sample {sample_id!r}"
        )


class NonFiniteValue(InputError):
    def __init__(self, probe_id, sample_id, value):
        self.probe_id = probe_id
        self.sample_id = sample_id
        self.value = value
        super().__init__(
            f"non-finite expression value {value!r} at probe {probe_id!r}, "
            f"sample {sample_id!r}"
        )


class DuplicateId(InputError):
    def __init__(self, kind, dup_id):
        self.kind = kind
        self.dup_id = dup_id
        super().__init__(f"duplicate {kind} id {dup_id!r}")


class EmptyGroup(InputError):
    def __init__(self, group):
        self.group = group
        super().__init__(f"group {group!r} has no samples")


# dp_core
class EmptyWeakPrior(InputError):
    """Zero concentration and no samples: the predictive is undefined."""

    def __init__(self):
        super().__init__("concentration is 0 and the sample is empty; "
                         "the predictive distribution is undefined")


class QuadratureFailure(NumericalError):
    def __init__(self, tolerance, max_evals):
        self.tolerance = tolerance
        self.max_evals = max_evals
        super().__init__(
            f"quadrature did not reach absolute tolerance {tolerance:g} "
            f"within {max_evals} integrand evaluations"
        )


class MissingQuantile(NumericalError):
    def __init__(self):
        super().__init__("the base-measure integral is needed but the "
                         "control base distribution has no quantile function "
                         "and no closed form applies")


# diffexpr
class PanelTooLarge(UsageError):
    def __init__(self, k, p):
        self.k = k
        self.p = p
        super().__init__(f"panel size k={k} needs 2k <= p, but p={p}")


# classifier
class NonPositiveExpression(InputError):
    def __init__(self, detail):
        super().__init__(f"expression values must be strictly positive "
                         f"and finite: {detail}")


# soft_ingest
class MissingTableMarkers(InputError):
    def __init__(self, which):
        self.which = which
        super().__init__(f"no {which} marker found in SOFT input")


class RaggedRow(InputError):
    def __init__(self, line_no, expected_cols, got_cols):
        self.line_no = line_no
        self.expected_cols = expected_cols
        self.got_cols = got_cols
        super().__init__(
            f"line {line_no}: expected {expected_cols} tab-separated "
            f"columns, got {got_cols}"
        )


class UnparseableValue(InputError):
    def __init__(self, line_no, column, text):
        self.line_no = line_no
        self.column = column
        self.text = text
        super().__init__(
            f"line {line_no}, column {column}: cannot parse {text!r} as a "
            f"decimal expression value"
        )


class MissingSubset(InputError):
    def __init__(self, wanted):
        self.wanted = wanted
        super().__init__(f"no SOFT subset matches {wanted!r}")


class UnknownSampleId(InputError):
    def __init__(self, sample_id):
        self.sample_id = sample_id
        super().__init__(f"sample id {sample_id!r} not present in the input")


class MissingProbe(InputError):
    def __init__(self, probe_id):
        self.probe_id = probe_id
        super().__init__(f"probe id {probe_id!r} required by the model is "
                         f"missing from the input")
