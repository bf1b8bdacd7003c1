"""
Path normalization for parameter values, so `parameters/*.txt` stays portable
between machines and working directories.

Functions:
- repo_root(): absolute path of the repository (parent of shared_tools/).
- _normalize_path_candidate(path_candidate, root): expand ~ and environment
  variables; anchor relative paths at the repository root.
- resolve_paths_in_params(params, root=None, logger=None): normalize path-like
  string values of a params dict in place and return the dict.

No numerical imports here; engines import it before anything heavy.
"""
from __future__ import annotations

import os
from typing import Dict, Optional

_PATH_SUFFIXES = ('.txt', '.csv', '.json', '.log')
_PATH_KEY_SUFFIXES = ('_FILE', '_DIR', '_PATH')


def repo_root() -> str:
    return os.path.abspath(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..'))


def _normalize_path_candidate(path_candidate: str, root: str) -> str:
    """Normalize a single path-like candidate to an absolute local path.

    - Expand ~ and environment variables.
    - Absolute results are returned as they are (normalized).
    - Relative results are joined to the repository root, not the current
      working directory, so engines behave the same from any directory.
    """
    if not isinstance(path_candidate, str) or not path_candidate:
        return path_candidate

    expanded = os.path.expanduser(os.path.expandvars(path_candidate))
    if os.path.isabs(expanded):
        return os.path.normpath(expanded)
    return os.path.normpath(os.path.join(root, expanded))


def _looks_like_path(key: str, s: str) -> bool:
    """Heuristic: True if the value (or its key) names a filesystem location.

    - key ends with _FILE, _DIR or _PATH
    - value starts with '~' or contains a slash
    - value ends with a known file extension
    Plain numbers and comma lists (r grids, lattices) are never paths.
    """
    if not isinstance(s, str) or not s:
        return False
    if key.upper().endswith(_PATH_KEY_SUFFIXES):
        return True
    if s.startswith('~') or '/' in s or '\\' in s:
        return True
    return s.lower().endswith(_PATH_SUFFIXES)


def resolve_paths_in_params(params: Dict, root: Optional[str] = None, logger: Optional[object] = None) -> Dict:
    """Normalize path-like string entries of params to absolute local paths.

    Non-string params are left untouched. The dict is mutated in place and
    returned for convenience.
    """
    if not isinstance(params, dict):
        return params
    anchor = root or repo_root()

    for key in [k for k in params.keys() if isinstance(params.get(k), str)]:
        original = params[key]
        if not _looks_like_path(key, original):
            continue
        normalized = _normalize_path_candidate(original, anchor)
        if normalized != original:
            if logger is not None:
                logger.debug(f"Resolved param '{key}': '{original}' -> '{normalized}'")
            params[key] = normalized
    return params
