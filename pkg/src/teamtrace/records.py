"""Decision-trace data model: records, validated traces, partitioning, blocking.

A trace is an ordered collection of decision instances. Each instance carries a
ground-truth label, the human's initial decision, the AI prediction, and the
human's final decision, plus optional confidence, timing, risk, and governance
fields. Traces are immutable after validation; every operation here is a pure
function, safe to run concurrently across partitions.
"""

from __future__ import annotations

from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Union

RISK_LEVELS = ("low", "medium", "high")
POLICIES = ("none", "escalate")

PARTITION_KEYS = (
    "participant_id",
    "session_id",
    "block_id",
    "task_id",
    "condition_id",
    "model_version",
)

#: Empty-trace / trace-level issues use this sentinel instead of a record index.
TRACE_LEVEL = -1


class DecisionRecord(NamedTuple):
    """One decision instance. Labels are opaque strings from the trace alphabet."""

    case_id: str
    ground_truth: str
    human_initial: str
    ai_prediction: str
    human_final: str
    confidence: Optional[float] = None
    t_ai_shown: Optional[int] = None  # ms since epoch
    t_final: Optional[int] = None  # ms since epoch, >= t_ai_shown
    risk: Optional[str] = None  # low | medium | high
    rollback: bool = False
    escalated: bool = False
    policy: Optional[str] = None  # None | "escalate" ("none" normalizes to None)
    feedback_observed: bool = False
    participant_id: Optional[str] = None
    session_id: Optional[str] = None
    block_id: Optional[str] = None
    task_id: Optional[str] = None
    condition_id: Optional[str] = None
    model_version: Optional[str] = None
    extra: Optional[Mapping[str, Any]] = None  # unknown input fields, preserved


FIELDS = DecisionRecord._fields
_REQUIRED = ("case_id", "ground_truth", "human_initial", "ai_prediction", "human_final")
_LABEL_FIELDS = ("ground_truth", "human_initial", "ai_prediction", "human_final")
_BOOL_FIELDS = ("rollback", "escalated", "feedback_observed")


class Ratio(NamedTuple):
    """A rate carried as exact counts so identities can be checked without float drift."""

    numerator: int
    denominator: int

    @property
    def value(self) -> Optional[float]:
        """Quotient, or None when the denominator is zero (Undefined)."""
        if self.denominator == 0:
            return None
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


def ratio(numerator: int, denominator: int) -> Ratio:
    if not 0 <= numerator <= denominator:
        raise ValueError(f"invalid rate counts {numerator}/{denominator}")
    return Ratio(numerator, denominator)


class ValidationIssue(NamedTuple):
    index: int  # record index in input order, or TRACE_LEVEL
    field: str
    reason: str

    def __str__(self) -> str:
        where = "trace" if self.index == TRACE_LEVEL else f"record {self.index}"
        return f"{where}: {self.field}: {self.reason}"


class TraceValidationError(ValueError):
    """Raised by validate_trace; carries every issue found (all-or-nothing)."""

    def __init__(self, issues: Sequence[ValidationIssue]):
        self.issues = list(issues)
        lines = "; ".join(str(i) for i in self.issues[:20])
        more = f" (+{len(self.issues) - 20} more)" if len(self.issues) > 20 else ""
        super().__init__(f"{len(self.issues)} validation issue(s): {lines}{more}")


class Trace:
    """An ordered, validated sequence of decision records over one label alphabet.

    Stored column-wise internally; ``records`` materializes DecisionRecord views
    lazily. Construct through :func:`validate_trace` (or the simulator); the
    constructor itself trusts its inputs.
    """

    __slots__ = ("alphabet", "metadata", "_columns", "_records")

    def __init__(
        self,
        columns: Mapping[str, list],
        alphabet: Iterable[str],
        metadata: Optional[Mapping[str, Any]] = None,
    ):
        if "case_id" not in columns:
            raise ValueError("columns must include case_id")
        n = len(columns["case_id"])
        defaults = DecisionRecord._field_defaults
        cols: dict[str, list] = {}
        for f in FIELDS:
            if f in columns:
                col = list(columns[f])
                if len(col) != n:
                    raise ValueError(f"column {f} has {len(col)} entries, expected {n}")
            elif f in defaults:
                col = [defaults[f]] * n
            else:
                raise ValueError(f"missing required column {f}")
            cols[f] = col
        self._columns = cols
        self.alphabet = frozenset(alphabet)
        self.metadata = dict(metadata or {})
        self._records: Optional[list[DecisionRecord]] = None

    @classmethod
    def from_records(
        cls,
        records: Iterable[DecisionRecord],
        alphabet: Iterable[str],
        metadata: Optional[Mapping[str, Any]] = None,
    ) -> "Trace":
        recs = list(records)
        columns = {f: [getattr(r, f) for r in recs] for f in FIELDS}
        return cls(columns, alphabet, metadata)

    def __len__(self) -> int:
        return len(self._columns["case_id"])

    def __iter__(self) -> Iterator[DecisionRecord]:
        return iter(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self.metadata == other.metadata
            and self._columns == other._columns
        )

    def __repr__(self) -> str:
        return f"Trace({len(self)} records, alphabet={sorted(self.alphabet)})"

    def column(self, name: str) -> list:
        """The full column for one record field, in record order."""
        if name not in self._columns:
            raise KeyError(name)
        return self._columns[name]

    @property
    def records(self) -> list[DecisionRecord]:
        if self._records is None:
            cols = [self._columns[f] for f in FIELDS]
            self._records = list(map(DecisionRecord._make, zip(*cols)))
        return self._records

    def take(self, indices: Sequence[int]) -> "Trace":
        """Sub-trace of the given row indices, preserving their order."""
        cols = {f: [col[i] for i in indices] for f, col in self._columns.items()}
        return Trace(cols, self.alphabet, self.metadata)

    def slice(self, start: int, stop: int) -> "Trace":
        cols = {f: col[start:stop] for f, col in self._columns.items()}
        return Trace(cols, self.alphabet, self.metadata)


RawRecord = Union[Mapping[str, Any], DecisionRecord]


def _as_mapping(rec: RawRecord) -> Mapping[str, Any]:
    if isinstance(rec, DecisionRecord):
        d = {f: v for f, v in zip(FIELDS, rec) if v is not None}
        extra = d.pop("extra", None)
        if extra:
            d.update(extra)
        return d
    return rec


def _coerce_label(value: Any) -> Optional[str]:
    if isinstance(value, str):
        return value
    # JSON sources may encode categorical labels as integers
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return None


def _coerce_timestamp(value: Any) -> Optional[int]:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return None


def validate_trace(
    records: Union[Iterable[RawRecord], Trace],
    alphabet: Optional[Iterable[str]] = None,
    *,
    metadata: Optional[Mapping[str, Any]] = None,
) -> Trace:
    """Build a validated Trace or raise TraceValidationError listing every issue.

    Accepts raw mappings (from the ingestion layer), DecisionRecords, or an
    existing Trace (revalidation is idempotent). Record order is the input
    order, except that when every record carries ``t_ai_shown`` the trace is
    ordered by (t_ai_shown, case_id) — presentation order for learning metrics.
    """
    if isinstance(records, Trace):
        if alphabet is None:
            alphabet = records.alphabet
        if metadata is None:
            metadata = records.metadata
        records = records.records
    if alphabet is None:
        raise ValueError("alphabet is required when records are not a Trace")

    alpha = frozenset(str(a) for a in alphabet)
    issues: list[ValidationIssue] = []
    if len(alpha) < 2:
        issues.append(ValidationIssue(TRACE_LEVEL, "alphabet", "alphabet must declare at least 2 labels"))

    cols: dict[str, list] = {f: [] for f in FIELDS}
    seen_case_ids: set[str] = set()
    n = 0

    for idx, raw in enumerate(records):
        rec = _as_mapping(raw)
        n += 1
        bad = False

        case_id = rec.get("case_id")
        if case_id is None or not isinstance(case_id, str) or not case_id:
            issues.append(ValidationIssue(idx, "case_id", "missing or empty case_id"))
            case_id = ""
            bad = True
        elif case_id in seen_case_ids:
            issues.append(ValidationIssue(idx, "case_id", f"duplicate case_id {case_id!r}"))
            bad = True
        else:
            seen_case_ids.add(case_id)

        labels = {}
        for f in _LABEL_FIELDS:
            v = _coerce_label(rec.get(f))
            if v is None:
                issues.append(ValidationIssue(idx, f, "missing required label"))
                bad = True
            elif v not in alpha:
                issues.append(ValidationIssue(idx, f, f"unknown label {v!r}"))
                bad = True
            labels[f] = v

        conf = rec.get("confidence")
        if conf is not None:
            if isinstance(conf, bool) or not isinstance(conf, (int, float)):
                issues.append(ValidationIssue(idx, "confidence", f"confidence not a number: {conf!r}"))
                conf, bad = None, True
            elif not 0.0 <= conf <= 1.0:
                issues.append(ValidationIssue(idx, "confidence", f"confidence out of range: {conf!r}"))
                conf, bad = None, True
            else:
                conf = float(conf)

        stamps = {}
        for f in ("t_ai_shown", "t_final"):
            v = rec.get(f)
            if v is not None:
                t = _coerce_timestamp(v)
                if t is None:
                    issues.append(ValidationIssue(idx, f, f"timestamp must be integer epoch-ms: {v!r}"))
                    bad = True
                v = t
            stamps[f] = v
        if (
            stamps["t_ai_shown"] is not None
            and stamps["t_final"] is not None
            and stamps["t_final"] < stamps["t_ai_shown"]
        ):
            issues.append(ValidationIssue(idx, "t_final", "timestamp inversion: t_final before t_ai_shown"))
            bad = True

        risk = rec.get("risk")
        if risk is not None and risk not in RISK_LEVELS:
            issues.append(ValidationIssue(idx, "risk", f"invalid risk level {risk!r}"))
            risk, bad = None, True

        policy = rec.get("policy")
        if policy == "none":
            policy = None
        elif policy is not None and policy not in POLICIES:
            issues.append(ValidationIssue(idx, "policy", f"invalid policy {policy!r}"))
            policy, bad = None, True

        flags = {}
        for f in _BOOL_FIELDS:
            v = rec.get(f, False)
            if v is None:
                v = False
            if not isinstance(v, bool):
                issues.append(ValidationIssue(idx, f, f"must be true or false, got {v!r}"))
                v, bad = False, True
            flags[f] = v

        keys = {}
        for f in PARTITION_KEYS:
            v = rec.get(f)
            if v is not None and not isinstance(v, str):
                issues.append(ValidationIssue(idx, f, f"partition key must be a string, got {v!r}"))
                v, bad = None, True
            keys[f] = v

        known = set(FIELDS)
        extra = {k: v for k, v in rec.items() if k not in known}
        if isinstance(raw, DecisionRecord) and raw.extra:
            extra = dict(raw.extra)

        if bad:
            continue
        cols["case_id"].append(case_id)
        for f in _LABEL_FIELDS:
            cols[f].append(labels[f])
        cols["confidence"].append(conf)
        cols["t_ai_shown"].append(stamps["t_ai_shown"])
        cols["t_final"].append(stamps["t_final"])
        cols["risk"].append(risk)
        cols["rollback"].append(flags["rollback"])
        cols["escalated"].append(flags["escalated"])
        cols["policy"].append(policy)
        cols["feedback_observed"].append(flags["feedback_observed"])
        for f in PARTITION_KEYS:
            cols[f].append(keys[f])
        cols["extra"].append(extra or None)

    if n == 0:
        issues.append(ValidationIssue(TRACE_LEVEL, "records", "empty trace"))
    if issues:
        raise TraceValidationError(issues)

    tai = cols["t_ai_shown"]
    if n and all(t is not None for t in tai):
        cid = cols["case_id"]
        order = sorted(range(n), key=lambda i: (tai[i], cid[i]))
        if order != list(range(n)):
            cols = {f: [col[i] for i in order] for f, col in cols.items()}

    return Trace(cols, alpha, metadata)


def partition(trace: Trace, keys: Sequence[str]) -> dict[tuple, Trace]:
    """Split a trace into sub-traces grouped by the given partition-key fields.

    Records missing a requested key land in partitions whose tuple carries None
    for that key (the "unkeyed" slot). Sub-traces preserve record order, and the
    union of all partitions is the original trace. ``keys=[]`` yields a single
    partition keyed by the empty tuple.
    """
    for k in keys:
        if k not in PARTITION_KEYS:
            raise ValueError(f"unknown partition key {k!r}; expected one of {PARTITION_KEYS}")
    if not keys:
        return {(): trace}
    key_cols = [trace.column(k) for k in keys]
    groups: dict[tuple, list[int]] = {}
    for i, key in enumerate(zip(*key_cols)):
        groups.setdefault(key, []).append(i)
    return {key: trace.take(idxs) for key, idxs in groups.items()}


class Block(NamedTuple):
    index: int
    label: Optional[str]  # block_id for by_label blocks, None for fixed-size
    trace: Trace


BlockScheme = Union[int, str]


def block_bounds(trace: Trace, scheme: BlockScheme) -> list[tuple[int, Optional[str], int, int]]:
    """Block boundaries as (index, label, start, stop) without copying records.

    ``scheme`` is either an integer n (fixed-size blocks of n records, the last
    possibly short) or the string "by_label" (contiguous runs of block_id; a
    label recurring later starts a new block).
    """
    n = len(trace)
    if scheme == "by_label":
        block_ids = trace.column("block_id")
        missing = next((i for i, b in enumerate(block_ids) if b is None), None)
        if missing is not None:
            raise ValueError(f"by_label blocking requires block_id on every record; missing at index {missing}")
        bounds: list[tuple[int, Optional[str], int, int]] = []
        start = 0
        for i in range(1, n + 1):
            if i == n or block_ids[i] != block_ids[start]:
                bounds.append((len(bounds), block_ids[start], start, i))
                start = i
        return bounds
    if isinstance(scheme, bool) or not isinstance(scheme, int):
        raise ValueError(f"blocking scheme must be 'by_label' or a positive block size, got {scheme!r}")
    if scheme < 1:
        raise ValueError(f"block size must be >= 1, got {scheme}")
    return [
        (k, None, start, min(start + scheme, n))
        for k, start in enumerate(range(0, n, scheme))
    ]


def split_blocks(trace: Trace, scheme: BlockScheme) -> list[Block]:
    """Split a trace into contiguous, order-preserving blocks.

    Concatenating the blocks in index order reproduces the trace exactly; see
    :func:`block_bounds` for the scheme grammar.
    """
    return [
        Block(k, label, trace.slice(start, stop))
        for k, label, start, stop in block_bounds(trace, scheme)
    ]
