"""
Result files: run manifests, replication CSVs and JSON reports.
"""
import csv
import datetime
import hashlib
import json
import os

import numpy as np


def canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(',', ':'))


def config_hash(data):
    """sha256 digest of the canonicalized config object."""
    return hashlib.sha256(canonical_json(data).encode('utf-8')).hexdigest()


def format_float(value):
    """Positional notation with 17 significant digits."""
    return np.format_float_positional(float(value), precision=17,
                                      unique=False, fractional=False,
                                      trim='-')


def _to_json(obj):
    if isinstance(obj, dict):
        return {str(k): _to_json(v) for (k, v) in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_json(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _to_json(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if np.isfinite(value) else str(value)
    return obj


def write_json(path, obj):
    """Write `obj` as indented JSON with sorted keys and LF line endings."""
    with open(path, 'w', newline='\n') as f:
        json.dump(_to_json(obj), f, indent=2, sort_keys=True)
        f.write('\n')


def timestamp():
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


class RunManifest(object):
    """
    Provenance of one run: subcommand, config hash, code version, master
    seed, timestamps and the validated parameters.
    """
    def __init__(self, command, config_data, seed, parameters=None):
        from ssprisk import __version__
        self.command = command
        self.config_hash = config_hash(config_data)
        self.version = __version__
        self.seed = seed
        self.parameters = {} if parameters is None else parameters
        self.started = timestamp()
        self.finished = None
        self.exit_code = None

    def __repr__(self):
        return (f"RunManifest({self.command}, config_hash = "
                f"{self.config_hash[:12]}, version = {self.version})")

    def as_dict(self):
        return {
            'command': self.command,
            'config_hash': self.config_hash,
            'version': self.version,
            'master_seed': self.seed,
            'started': self.started,
            'finished': self.finished,
            'exit_code': self.exit_code,
            'parameters': self.parameters
        }

    def write(self, out_dir, exit_code):
        self.finished = timestamp()
        self.exit_code = exit_code
        write_json(os.path.join(out_dir, 'manifest.json'), self.as_dict())


class RecordWriter(object):
    """
    Stream RiskRecords to `<path>.partial`; on close(success=True) the file
    is renamed to `path`, otherwise the partial file is kept.
    """
    header = ['n', 'rep', 'seed', 'risk', 'emp_gap', 'oracle_gap', 'wall_ms']

    def __init__(self, path):
        self.path = path
        self.partial_path = path + '.partial'
        self._file = open(self.partial_path, 'w', newline='')
        self._writer = csv.writer(self._file, lineterminator='\n')
        self._writer.writerow(self.header)

    def write(self, record):
        self._writer.writerow([
            str(record.n),
            str(record.rep),
            str(record.seed),
            format_float(record.risk),
            format_float(record.emp_gap),
            format_float(record.oracle_gap),
            format_float(record.wall_ms)
        ])
        self._file.flush()

    def close(self, success=True):
        self._file.close()
        if success:
            os.replace(self.partial_path, self.path)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.close(success=exc_type is None)
        return False


def read_records(path):
    """Read a records CSV back into a list of dicts of floats."""
    with open(path, 'r', newline='') as f:
        reader = csv.DictReader(f)
        return [{k: float(v) for (k, v) in row.items()} for row in reader]


def write_table(path, header, rows):
    """Write a plain CSV table with LF line endings."""
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([
                format_float(v) if isinstance(v, (float, np.floating))
                else str(v) for v in row
            ])
