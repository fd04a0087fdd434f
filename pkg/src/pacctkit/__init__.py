"""Process-accounting log toolkit: codecs, reports, synthesis, rendering."""

from .errors import (
    ConfigError,
    DuplicateName,
    FieldRangeError,
    IncompatibleRender,
    MalformedRecord,
    NoReportsRegistered,
    PacctError,
    TruncatedFile,
    UnknownFormat,
)
from .acct_format import (
    COMP_T_MAX,
    DEFAULT_AHZ,
    RECORD_SIZE,
    Endianness,
    FlagSet,
    FormatKind,
    ProcessRecord,
    RecordStream,
    decode_comp_t,
    detect_format,
    encode_comp_t,
    encode_record,
    open_record_stream,
    parse_record,
    ticks_to_seconds,
)
from .engine import (
    ReportEngine,
    ReportError,
    ReportRegistration,
    RunMetadata,
    RunResult,
    run_single_pass,
)
from .reports import (
    STANDARD_REPORT_NAMES,
    FeatureTable,
    GeneralSummary,
    Histogram,
    HistogramSpec,
    RankedList,
    default_spec,
    standard_reports,
    user_features,
)
from .config import AnalysisConfig, load_config, load_passwd
from .compare import ComparisonResult, PairedReport, compare_reports
from .render import (
    SCHEMA_VERSION,
    RenderTarget,
    render,
    render_html,
    render_run_json,
    render_to,
)
from .synthgen import (
    PROFILE_NAMES,
    GeneratorConfig,
    UserProfile,
    builtin_profiles,
    generate_log,
    get_profile,
)

__version__ = "0.1.0"
