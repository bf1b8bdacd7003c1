#!/usr/bin/env python

import json
import os
import sys
import logging
import tempfile
import pandas as pd
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar, Union
from os import PathLike

T = TypeVar("T")
R = TypeVar("R")


# ----------------------------------------------------------- #
#                  Shared Utility Functions                   #
# ----------------------------------------------------------- #

def initialize_performance_data(script_version: str, command: str = "", script_name: str = "cyclab") -> Dict[str, Any]:
    """
    Creates the performance row for one lab run.

    Args:
        script_version: Version string of the engine.
        command: Subcommand being executed (norm, approx, ...).
        script_name: Prefix for the version column.

    Returns:
        Dictionary with initialized timing fields.
    """
    return {
        "run_id": os.environ.get('CYCLAB_RUN_ID', ''),
        "run_start_timestamp": datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
        f"{script_name}_version": script_version,
        "command": command,
        "threads": 1,
        "param_load_duration_s": 0.0,
        "compute_duration_s": 0.0,
        "overall_script_duration_s": 0.0,
        "exit_code": None,
    }


def log_performance_data(
    perf_data: Dict[str, Any],
    params: Dict[str, Any],
    logger: logging.Logger,
    performance_file_key: str = "PERFORMANCE_FILE"
) -> None:
    """
    Appends the run's performance row to the CSV named by ``performance_file_key``.

    A missing key only disables the log; write failures are reported and
    never raised, so a finished computation is not turned into an error.
    """
    log_path = params.get(performance_file_key)
    if not log_path:
        logger.warning(f"'{performance_file_key}' not in params. Skipping performance logging.")
        return

    try:
        df = pd.DataFrame([perf_data])
        directory = os.path.dirname(log_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        df.to_csv(log_path, mode='a', header=not os.path.exists(log_path), index=False, lineterminator='\n')
        logger.debug(f"Logged performance data to: {log_path}")
    except (IOError, OSError) as log_err:
        logger.error(f"Failed to log performance data to '{log_path}': {log_err}")


class FlushingStreamHandler(logging.StreamHandler):
    """
    A StreamHandler that flushes after every emit.
    Long sweeps otherwise show nothing until the buffer fills.
    """
    def emit(self, record):
        super().emit(record)
        self.flush()


def _recursive_update(d: Dict[str, Any], u: Dict[str, Any]) -> Dict[str, Any]:
    for k, v in u.items():
        if isinstance(v, dict) and k in d and isinstance(d[k], dict):
            d[k] = _recursive_update(d.get(k, {}), v)
        else:
            d[k] = v
    return d


class JsonWebLogHandler(logging.Handler):
    """
    Logging handler that merges status snapshots into a JSON progress file.
    It only acts on log records that carry a 'web_data' attribute.
    """
    def __init__(self, filename):
        super().__init__()
        self.filename = filename
        dir_name = os.path.dirname(self.filename)
        if dir_name:
            os.makedirs(dir_name, exist_ok=True)

    def emit(self, record):
        if not hasattr(record, 'web_data'):
            return
        try:
            try:
                with open(self.filename, 'r', encoding='utf-8') as f:
                    data = json.load(f)
            except (FileNotFoundError, json.JSONDecodeError):
                data = {}
            write_json_atomic(self.filename, _recursive_update(data, record.web_data))
        except Exception as e:
            print(f"CRITICAL: JsonWebLogHandler failed to write to '{self.filename}': {e}", file=sys.stderr)


def json_default(obj: Any) -> Any:
    """json.dump fallback for numpy scalars and arrays and complex numbers ([re, im])."""
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if hasattr(obj, "tolist"):
        value = obj.tolist()
        if isinstance(value, complex):
            return [value.real, value.imag]
        if isinstance(value, list):
            return [json_default(v) if isinstance(v, complex) else v for v in value]
        return value
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def write_json_atomic(path: Union[str, PathLike[str], bytes], data: Dict[str, Any]) -> None:
    """
    Write a JSON file atomically: write to a temp file in the same directory and replace.
    Keeps UTF-8 and pretty formatting and ensures the directory exists.
    """
    path_str = os.fspath(path)
    if not path_str:
        raise ValueError("No path provided for write_json_atomic")
    directory = os.path.dirname(path_str) or "."
    os.makedirs(directory, exist_ok=True)
    fd = None
    tmp_path = None
    try:
        fd, tmp_path = tempfile.mkstemp(prefix='.tmp_json_', dir=directory)
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            fd = None
            json.dump(data, f, indent=4, ensure_ascii=False, allow_nan=True, default=json_default)
            f.write('\n')
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path_str)
    except Exception:
        if tmp_path and os.path.exists(tmp_path):
            try:
                os.remove(tmp_path)
            except Exception:
                pass
        raise


def write_csv_atomic(path: Union[str, PathLike[str]], df: pd.DataFrame, header_comment: Optional[str] = None) -> None:
    """
    Write a DataFrame as CSV atomically (temp file + replace).

    ``header_comment`` becomes a leading ``# ...`` line. Floats are written
    with repr precision so they read back bit-for-bit; line endings are ``\\n``.
    """
    path_str = os.fspath(path)
    if not path_str:
        raise ValueError("No path provided for write_csv_atomic")
    directory = os.path.dirname(path_str) or "."
    os.makedirs(directory, exist_ok=True)
    tmp_path = None
    try:
        fd, tmp_path = tempfile.mkstemp(prefix='.tmp_csv_', dir=directory)
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            df.to_csv(f, index=False, lineterminator='\n', float_format=lambda x: repr(float(x)))
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path_str)
    except Exception:
        if tmp_path and os.path.exists(tmp_path):
            try:
                os.remove(tmp_path)
            except Exception:
                pass
        raise


def map_parallel(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """
    Apply ``func`` to every item, keeping input order.

    Runs a plain loop for threads <= 1, which keeps results bitwise
    reproducible; otherwise a ThreadPoolExecutor with that many workers.
    """
    work = list(items)
    if threads is None or threads <= 1 or len(work) <= 1:
        return [func(item) for item in work]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(func, work))


def setup_logger(logger_name, log_file, web_log_file, level=logging.INFO):
    """
    Configures and returns a logger with console, file, and JSON progress handlers.

    This function is idempotent: if a logger with the same name is already
    configured, it will return the existing logger (with its level updated)
    without adding more handlers.
    """
    logger = logging.getLogger(logger_name)

    if logger.hasHandlers() and logger.handlers:
        logger.setLevel(level)
        return logger

    logger.setLevel(level)
    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    # --- Handler 1: Console Output (stderr keeps stdout free for results) ---
    stream_handler = FlushingStreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    # --- Handler 2: Main Log File ---
    if log_file and isinstance(log_file, str):
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.FileHandler(log_file, mode='a', encoding='utf-8')
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
    else:
        logger.debug(f"No log_file for logger '{logger_name}'; file logging disabled.")

    # --- Handler 3: JSON progress file ---
    if web_log_file and isinstance(web_log_file, str):
        logger.addHandler(JsonWebLogHandler(web_log_file))
    else:
        logger.debug(f"No progress file for logger '{logger_name}'; status snapshots disabled.")

    return logger


def _convert_value(key: str, value_str: str, target_type: Any) -> Any:
    if target_type == bool:
        if value_str.lower() in ('true', 'yes', '1'):
            return True
        if value_str.lower() in ('false', 'no', '0'):
            return False
        raise ValueError(f"Boolean value for '{key}' must be one of 'true'/'false', got '{value_str}'")
    if target_type == str:
        return os.path.expanduser(value_str) if value_str.startswith('~') else value_str
    return target_type(value_str)


def load_parameters_from_file(
    filepaths: Union[str, List[str]],
    expected_parameters: Dict[str, Any],
    logger_instance: logging.Logger = None
) -> Dict[str, Any]:
    """
    Reads ``key = value`` parameters from one or more files.
    Parameters from later files in the list override those from earlier files.

    Args:
        filepaths (Union[str, List[str]]): A single file path or a list of file paths.
        expected_parameters (dict): Parameter names mapped to their expected types.
        logger_instance: Optional logger instance for logging messages.

    Returns:
        dict: The merged parameters. Values that fail conversion are kept as
        raw strings (the typed accessors in ``lab_config`` fall back to defaults).

    Raises:
        FileNotFoundError: if any listed file does not exist.
    """
    parameters: Dict[str, Any] = {}
    paths_to_process: List[str] = [filepaths] if isinstance(filepaths, str) else list(filepaths)

    def warn(message: str) -> None:
        if logger_instance:
            logger_instance.warning(message)
        else:
            print(f"Warning: {message}", file=sys.stderr)

    for filepath in paths_to_process:
        try:
            with open(filepath, 'r', encoding='utf-8') as f:
                for line_number, raw_line in enumerate(f, 1):
                    line = raw_line.strip()
                    if not line or line.startswith('#'):
                        continue

                    parts = line.split('=', 1)
                    if len(parts) != 2:
                        warn(f"Malformed line {line_number} in '{filepath}': '{line}'. Skipping.")
                        continue

                    key, value_str = parts[0].strip(), parts[1].strip()
                    if ' #' in value_str:
                        value_str = value_str.split(' #', 1)[0].rstrip()
                    if (value_str.startswith('"') and value_str.endswith('"')) or \
                            (value_str.startswith("'") and value_str.endswith("'")):
                        value_str = value_str[1:-1]

                    target_type = expected_parameters.get(key)
                    if not target_type:
                        if logger_instance:
                            logger_instance.debug(f"Unknown parameter key '{key}' in '{filepath}'. Treating as string.")
                        parameters[key] = _convert_value(key, value_str, str)
                        continue
                    try:
                        parameters[key] = _convert_value(key, value_str, target_type)
                    except ValueError:
                        warn(f"Could not convert value '{value_str}' for key '{key}' to "
                             f"{target_type.__name__}. Falling back to raw string value.")
                        parameters[key] = value_str

        except FileNotFoundError:
            message = f"Parameters file not found: '{filepath}'"
            if logger_instance:
                logger_instance.critical(message)
            else:
                print(f"CRITICAL ERROR: {message}", file=sys.stderr)
            raise

    return parameters
