"""Sign identities shared by the renderer, recognizer and protocol."""
from .errors import InvalidInput

ATTENTION = "AttentionGained"
YES = "Yes"
NO = "No"
CANONICAL_SIGNS = (ATTENTION, YES, NO)

_ALIASES = {
    "attentiongained": ATTENTION,
    "attention": ATTENTION,
    "attention_gained": ATTENTION,
    "yes": YES,
    "no": NO,
}


def canonical_sign(name: str) -> str:
    """Map known aliases to their canonical spelling; other names pass
    through so the sign set stays open to extension."""
    text = str(name).strip()
    if not text or any(c.isspace() for c in text) or "," in text:
        raise InvalidInput(f"invalid sign name: {name!r}")
    return _ALIASES.get(text.lower(), text)
