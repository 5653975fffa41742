"""Network-facing session host."""

from .config import AppConfig
from .session import PhaseLedger, Session, SessionManager
from .ttscache import TtsCache, TtsCacheEntry, cache_key
