use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

/// Machine-readable diagnostic identifiers shared by the map, plan and trace parsers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    SyntaxError,
    DuplicateLocation,
    DuplicateDock,
    UnknownEdgeEndpoint,
    SelfEdge,
    DuplicateEdge,
    MissingDock,
    Disconnected,
    EmptyRoster,
    DuplicateMember,
    ReservedIdentifier,
    DuplicateReminderId,
    UnknownLocation,
    UnknownMember,
    BadWindow,
    DwellExceedsWindow,
    BadRepeat,
    BadDailyMax,
    BadTag,
    DepthExceeded,
    RecipientPredicateDivergence,
    UnsortedEvents,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::SyntaxError => "SyntaxError",
            Code::DuplicateLocation => "DuplicateLocation",
            Code::DuplicateDock => "DuplicateDock",
            Code::UnknownEdgeEndpoint => "UnknownEdgeEndpoint",
            Code::SelfEdge => "SelfEdge",
            Code::DuplicateEdge => "DuplicateEdge",
            Code::MissingDock => "MissingDock",
            Code::Disconnected => "Disconnected",
            Code::EmptyRoster => "EmptyRoster",
            Code::DuplicateMember => "DuplicateMember",
            Code::ReservedIdentifier => "ReservedIdentifier",
            Code::DuplicateReminderId => "DuplicateReminderId",
            Code::UnknownLocation => "UnknownLocation",
            Code::UnknownMember => "UnknownMember",
            Code::BadWindow => "BadWindow",
            Code::DwellExceedsWindow => "DwellExceedsWindow",
            Code::BadRepeat => "BadRepeat",
            Code::BadDailyMax => "BadDailyMax",
            Code::BadTag => "BadTag",
            Code::DepthExceeded => "DepthExceeded",
            Code::RecipientPredicateDivergence => "RecipientPredicateDivergence",
            Code::UnsortedEvents => "UnsortedEvents",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::Disconnected | Code::RecipientPredicateDivergence => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    /// 1-based source line.
    pub line: usize,
}

impl Diagnostic {
    pub fn new(line: usize, code: Code, message: impl Into<String>) -> Self {
        Self { severity: code.severity(), code, message: message.into(), line }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `LINE:CODE:message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.line, self.code, self.message)
    }
}

/// Deterministic diagnostic order: by line, then code, then message.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| (a.line, a.code, &a.message).cmp(&(b.line, b.code, &b.message)));
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// A successfully parsed value together with any non-blocking warnings.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<Diagnostic>,
}

/// Splits a diagnostic list into `Ok` (warnings only) or `Err` (at least one error).
pub(crate) fn finish<T>(value: T, mut diags: Vec<Diagnostic>) -> Result<Parsed<T>, Vec<Diagnostic>> {
    sort_diagnostics(&mut diags);
    if has_errors(&diags) {
        Err(diags)
    } else {
        Ok(Parsed { value, warnings: diags })
    }
}
