"""Provider gateway: prompt templates, reply parsing, provider transports."""

from .parsing import (
    Dependency,
    DependencyVerdict,
    FactIssue,
    NextQuestion,
    ParsedFactCheck,
    PlainText,
    ReplyParseError,
    StructuredReply,
    Tone,
    parse_reply,
)
from .providers import (
    Gateway,
    MockBackend,
    ProviderConfig,
    ScriptEntry,
    load_mock_script,
    mock_embed,
    mock_synthesize,
)
from .templates import TEMPLATES, TONE_NAMES, load_tone_definitions, render
