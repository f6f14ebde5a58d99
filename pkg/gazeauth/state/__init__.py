"""Result persistence."""
from .manager import ResultStore
from .models import ResultRecord

__all__ = ["ResultStore", "ResultRecord"]
