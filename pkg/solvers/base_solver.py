"""
Base Solver Class
All solver components inherit from this class
"""

import logging
import re
from typing import Dict


class BaseSolver:
    """Base class for all solver components"""

    def __init__(self, name: str):
        self.name = name
        slug = re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")
        self.logger = logging.getLogger(f"tradeoff.{slug}")
        self.options = None

    def log(self, message: str, level: int = logging.INFO):
        """Component logging"""
        self.logger.log(level, f"[{self.name}] {message}")

    def debug(self, message: str):
        self.log(message, logging.DEBUG)

    def warn(self, message: str):
        self.log(message, logging.WARNING)

    def get_status(self) -> Dict:
        """Return component status"""
        return {
            "name": self.name,
            "options": self.options.to_dict() if self.options is not None else {},
            "status": "active",
        }
