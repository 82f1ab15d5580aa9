"""ramvision: object-centric extraction for a deterministic mini-console.

Three built-in cartridges expose their full game state through a 128-byte
RAM. Objects can be recovered two ways: REM decodes them straight from RAM,
VEM segments them out of the rendered frame. The two views agree exactly on
quirk-free games and disagree in controlled, attributable ways when render
quirks are enabled.
"""

from .console import Console, SavedState, create
from .games import CARTRIDGES, GAME_IDS, get_cartridge
from .model import Frame, GameObject, ObjectList, Palette
from .rem import DecoderSpec, Tracker, extract_rem
from .vem import VisionSpec, extract_vem

__version__ = "0.1.0"

__all__ = [
    "CARTRIDGES",
    "Console",
    "DecoderSpec",
    "Frame",
    "GAME_IDS",
    "GameObject",
    "ObjectList",
    "Palette",
    "SavedState",
    "Tracker",
    "VisionSpec",
    "__version__",
    "create",
    "extract_rem",
    "extract_vem",
    "get_cartridge",
]
