from typing import Any, Dict, Iterable, Optional

from pydantic import BaseModel as PydanticBaseModel


class BaseModel(PydanticBaseModel):
    """Base class for every admmlp model.

    Models are immutable once built. Numpy arrays are allowed as field types,
    but are only checked with ``isinstance``.
    """

    class Config:
        frozen = True
        arbitrary_types_allowed = True

    def to_dict(self, ignore: Optional[Iterable[str]] = None) -> Dict[str, Any]:
        """Convert the class instance to a dict."""
        if ignore is None:
            ignore = []
        return self.dict(exclude=set(ignore))


class MutableModel(BaseModel):
    """A model whose fields may be reassigned, used for per-call state."""

    class Config:
        frozen = False
        arbitrary_types_allowed = True
