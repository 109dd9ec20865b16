"""Exception types shared across the toolkit."""


class M2tError(Exception):
    """Base class for all toolkit errors."""


# --- meaning representations ---

class MrSyntaxError(M2tError):
    """Input text does not match the MR grammar."""


class UnknownDialogueActError(M2tError):
    """Dialogue act not present in the loaded schema (strict mode)."""


class UnknownAttributeError(M2tError):
    """Slot attribute not present in the loaded schema (strict mode)."""


class UnknownTopicError(M2tError):
    """KG topic not present in the loaded schema (strict mode)."""


class UnknownRelationError(M2tError):
    """KG relation not present in the loaded schema for its topic."""


class DuplicateAttributeError(M2tError):
    """The same attribute name appears more than once in one MR."""


class EscapingRequiredError(M2tError):
    """A field contains a reserved delimiter of the active serialization.

    The textual MR formats define no escape syntax, so such values are
    rejected rather than silently corrupting the serialized form.
    """


class AmbiguousCommaSplitError(MrSyntaxError):
    """A parenthesized triple group has more than two top-level commas."""


# --- realization / corpus generation ---

class NoTemplateForSignatureError(M2tError):
    """No template in the bank realizes the MR's relation sequence."""


class InsufficientTriplesError(M2tError):
    """The triple source cannot meet the configured split targets."""


class EndpointUnavailableError(M2tError):
    """The triple endpoint is unreachable and no cached result exists."""


class UnmappedRelationError(M2tError):
    """Relation has no KG property mapping in the schema file."""


# --- prompts ---

class EmbeddedNewlineError(M2tError):
    """An exemplar MR or reference contains a newline character."""


class MarkerCollisionError(M2tError):
    """An exemplar contains one of the prompt marker literals."""


class InsufficientCorpusError(M2tError):
    """Not enough corpus records to sample the requested exemplars."""


# --- completion client ---

class BackendError(M2tError):
    """Backend request failed after all retries.

    ``retryable`` marks failures worth another attempt (timeouts, 429, 5xx);
    client errors and malformed responses are final.
    """

    def __init__(self, message: str, *, retryable: bool = False):
        super().__init__(message)
        self.retryable = retryable


class AuthMissingError(M2tError):
    """Credential environment variable named in the backend config is unset."""


class BudgetExceededError(M2tError):
    """The configured request quota for this client has been reached."""


class UnparsableTestMrError(M2tError):
    """The prompt's final MR line does not parse as any known MR form."""


# --- metrics / statistics ---

class DegenerateSampleError(M2tError):
    """A statistic is undefined because a sample has zero variance."""


class MissingLexiconEntryWarning(UserWarning):
    """Slot alignment fell back to verbatim matching for a slot value."""


# --- annotation / reporting ---

class OutOfRangeLabelError(M2tError):
    """An annotation label is outside its documented range."""


class StoreMissingError(M2tError):
    """A referenced store file does not exist."""


class AnnotationValidationError(M2tError):
    """An annotation record is inconsistent with the item it references."""


class EmptyGroupError(M2tError):
    """A grouping or join produced no records."""
