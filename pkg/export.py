"""
Export module for strataflow.
Writes posets, DOT diagrams, class diagrams and run logs to an output directory.
"""

import os
import json
import logging
from datetime import datetime
from typing import Dict, Union

import pandas as pd

from config import StrataConfig
from flows import FlowDiagram, codimension_pair, degeneracy_profile, format_diagram, pattern_name
from poset import FinitePoset, StratifiedPoset, format_poset, to_dot
from utils import ensure_directory

logger = logging.getLogger(__name__)

RUN_LOG = 'run_log.json'
KEEP_RUNS = 30


class ResultWriter:
    """Saves pipeline results to files."""

    def __init__(self, out_dir: str = StrataConfig.OUTPUT_DIR):
        """Initialize with output directory."""
        self.out_dir = out_dir
        ensure_directory(self.out_dir)

    def _path(self, filename: str) -> str:
        return os.path.join(self.out_dir, filename)

    def _write_text(self, text: str, filename: str) -> bool:
        filepath = self._path(filename)
        try:
            with open(filepath, 'w', encoding='ascii', newline='\n') as f:
                f.write(text)
            logger.info(f"Saved {filepath}")
            return True
        except OSError as e:
            logger.error(f"Error saving to {filepath}: {e}")
            return False

    def save_poset(self, p: Union[FinitePoset, StratifiedPoset], filename: str = 'component.poset') -> bool:
        return self._write_text(format_poset(p), filename)

    def save_dot(self, p: Union[FinitePoset, StratifiedPoset], filename: str = 'component.dot',
                 title: str = 'component') -> bool:
        return self._write_text(to_dot(p, title), filename)

    def save_diagrams(self, named: Dict[str, FlowDiagram], subdir: str = 'classes') -> bool:
        """One .flow file per class, named by element id."""
        directory = self._path(subdir)
        if not ensure_directory(directory):
            return False
        ok = True
        for ident, d in sorted(named.items()):
            ok = self._write_text(format_diagram(d), os.path.join(subdir, f"{ident}.flow")) and ok
        return ok

    def save_class_table(self, named: Dict[str, FlowDiagram], filename: str = 'classes.csv') -> bool:
        """Flat per-class table for analysis."""
        filepath = self._path(filename)
        try:
            rows = []
            for ident, d in sorted(named.items()):
                q1, q2 = codimension_pair(d)
                rows.append({
                    'id': ident,
                    'codim': q1 + q2,
                    'q1': q1,
                    'q2': q2,
                    'degeneracy': degeneracy_profile(d),
                    'boundary_0': pattern_name(d.circle_word(0)),
                    'boundary_1': pattern_name(d.circle_word(1)),
                })
            df = pd.DataFrame(rows, columns=['id', 'codim', 'q1', 'q2', 'degeneracy',
                                             'boundary_0', 'boundary_1'])
            df.to_csv(filepath, index=False, encoding='ascii', lineterminator='\n')
            logger.info(f"Saved class table to {filepath}")
            return True

        except OSError as e:
            logger.error(f"Error saving class table {filepath}: {e}")
            return False

    def log_run(self, report: dict, success: bool = True, error_msg: str = None):
        """Append a run entry to the run log, keeping the last 30."""
        log_entry = {
            'timestamp': datetime.now().isoformat(),
            'success': success,
            'report': report,
            'error': error_msg,
        }
        log_file = self._path(RUN_LOG)

        try:
            if os.path.exists(log_file):
                with open(log_file, 'r', encoding='utf-8') as f:
                    logs = json.load(f)
            else:
                logs = []

            logs.append(log_entry)
            logs = logs[-KEEP_RUNS:]

            with open(log_file, 'w', encoding='utf-8') as f:
                json.dump(logs, f, indent=2)

            logger.info(f"Logged run to {log_file}")

        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Error logging run: {e}")
