"""File storage for run configurations and reports."""

import json
import logging
from pathlib import Path
from typing import Any

from poisson_bv.models.config import RunConfig
from poisson_bv.utils.errors import PoissonBVError

logger = logging.getLogger(__name__)


class ConfigStorageError(PoissonBVError):
    """Base exception for config and report file errors."""

    exit_code = 1


class CorruptedConfigError(ConfigStorageError):
    """Raised when a config file is not valid JSON or has the wrong structure."""
    pass


class ConfigValidationError(ConfigStorageError):
    """Raised when a configuration fails validation before persistence."""
    pass


class ConfigStorage:
    """Reads and writes RunConfig documents and JSON reports.

    Writes go through a temporary file that is re-read before it replaces the
    target, so a failed write never leaves a truncated document behind.
    """

    def _save_json(self, path: Path, data: Any) -> None:
        """Save data to a JSON file.

        Raises:
            ConfigStorageError: If the file cannot be written
            ConfigValidationError: If the data is not serializable
        """
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            temp_path = path.with_suffix(path.suffix + ".tmp")
            with open(temp_path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2, sort_keys=True)
            with open(temp_path, encoding="utf-8") as f:
                json.load(f)
            temp_path.replace(path)
            logger.info(f"Saved {path}")
        except OSError as e:
            error_msg = f"Failed to write file {path}: {e}"
            logger.error(error_msg)
            raise ConfigStorageError(error_msg) from e
        except (TypeError, ValueError) as e:
            error_msg = f"Failed to serialize data: {e}"
            logger.error(error_msg)
            raise ConfigValidationError(error_msg) from e

    def _load_json(self, path: Path) -> Any:
        """Load a JSON file.

        Raises:
            ConfigStorageError: If the file is missing or unreadable
            CorruptedConfigError: If the file is not valid JSON
        """
        if not path.exists():
            raise ConfigStorageError(f"File not found: {path}")
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            error_msg = f"Corrupted JSON file {path}: {e}"
            logger.error(error_msg)
            raise CorruptedConfigError(error_msg) from e
        except OSError as e:
            error_msg = f"Failed to read file {path}: {e}"
            logger.error(error_msg)
            raise ConfigStorageError(error_msg) from e
        logger.info(f"Loaded {path}")
        return data

    def save_run_config(self, path: Path | str, config: RunConfig) -> None:
        """Validate and save a run configuration.

        Raises:
            ConfigValidationError: If the configuration is invalid
            ConfigStorageError: If the file cannot be written
        """
        try:
            config.validate()
        except ValueError as e:
            raise ConfigValidationError(f"Invalid run configuration: {e}") from e
        self._save_json(Path(path), config.to_dict())

    def load_config_data(self, path: Path | str) -> dict[str, Any]:
        """Raw config document, for merging with command-line flags.

        Raises:
            CorruptedConfigError: If the document is not a JSON object
        """
        data = self._load_json(Path(path))
        if not isinstance(data, dict):
            raise CorruptedConfigError(f"Config file {path} must hold a JSON object")
        return data

    def load_run_config(self, path: Path | str) -> RunConfig:
        """Load a run configuration.

        Raises:
            CorruptedConfigError: If the file is not a valid RunConfig document
        """
        data = self.load_config_data(path)
        try:
            return RunConfig.from_dict(data)
        except (KeyError, ValueError, TypeError) as e:
            error_msg = f"Failed to deserialize run configuration: {e}"
            logger.error(error_msg)
            raise CorruptedConfigError(error_msg) from e

    def save_report(self, path: Path | str, report: Any) -> None:
        """Save a report object (anything with to_dict) or a plain dictionary."""
        data = report.to_dict() if hasattr(report, "to_dict") else report
        self._save_json(Path(path), data)
