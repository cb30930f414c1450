"""
Base class for the lab's management commands.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional

from decouple import RepositoryEnv
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from .exceptions import ConfigError, LabError, error_payload

logger = logging.getLogger(__name__)


def read_config_file(path: Optional[str]) -> Dict[str, str]:
    """
    Read a flat KEY=VALUE document; keys come back lower-cased.

    Raises:
        ConfigError: if the file cannot be read
    """
    if not path:
        return {}
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}", details={'path': str(path)})
    try:
        repository = RepositoryEnv(str(path))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return {key.lower(): value for key, value in repository.data.items()}


class LabCommand(BaseCommand):
    """
    Adds the global --seed, --config, --out and --threads flags and turns
    lab errors into exit codes (2 for configuration, 3 for data errors).

    Subclasses implement add_lab_arguments() and run().
    """

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=None, help='Random seed (default: LAB_SEED)')
        parser.add_argument('--config', default=None, help='Flat KEY=VALUE settings file')
        parser.add_argument('--out', default=None, help='Output directory (default: LAB_OUTPUT_DIR)')
        parser.add_argument('--threads', type=int, default=None, help='Worker threads (default: LAB_THREADS)')
        self.add_lab_arguments(parser)

    def add_lab_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        try:
            self.file_settings = read_config_file(options.get('config'))
            self.seed = self._resolve(options.get('seed'), 'seed', settings.LAB_SEED, int)
            self.threads = self._resolve(options.get('threads'), 'threads', settings.LAB_THREADS, int)
            self.out_dir = Path(options.get('out') or settings.LAB_OUTPUT_DIR)
            self.out_dir.mkdir(parents=True, exist_ok=True)
            return self.run(**options)
        except LabError as exc:
            payload = error_payload(exc)
            logger.error(f"{self.__class__.__module__.rsplit('.', 1)[-1]} failed: {exc.message}")
            self.stderr.write(json.dumps(payload, default=str))
            raise CommandError(exc.message, returncode=exc.exit_code) from exc

    def _resolve(self, flag, key: str, default, cast):
        """CLI flag, then config file, then the settings default."""
        if flag is not None:
            return flag
        if key in self.file_settings:
            try:
                return cast(self.file_settings[key])
            except ValueError as exc:
                raise ConfigError(f"{key.upper()} must be {cast.__name__}, got '{self.file_settings[key]}'") from exc
        return default

    def run(self, **options):
        raise NotImplementedError('LabCommand subclasses must implement run()')
