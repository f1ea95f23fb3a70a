"""Similarity kernels: compiled extension when available, pure Python otherwise.

Set THREATRAG_KERNELS=python (or =c) to force a backend. Both backends are
bit-identical; the compiled one is just faster on large scans.
"""

import os

_choice = os.environ.get("THREATRAG_KERNELS", "auto").lower()

if _choice == "python":
    from . import _pykernels as _impl
elif _choice == "c":
    from . import _ckernels as _impl  # ImportError here means the ext was not built
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        from . import _pykernels as _impl

BACKEND = _impl.BACKEND_NAME

cosine = _impl.cosine
cosine_scores = _impl.cosine_scores
bertscore_pr = _impl.bertscore_pr
dot = _impl.dot
norm = _impl.norm
