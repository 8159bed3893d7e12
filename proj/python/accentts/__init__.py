# Copyright (c) 2026 The accentts Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""accentts: accented text-to-speech workbench.

The heavy lifting lives in the compiled ``accentts._core`` extension:
``metrics`` (PER/WER, KLD, DTW, pitch and duration metrics), ``signal``
(mel/F0 extraction, spectrogram inversion), ``lexicon`` (per-accent
lexicons and difference statistics), ``g2p``/``acoustic`` (model
inference over saved checkpoints) and ``workbench.run_pipeline`` for the
training/evaluation stages.
"""

import sys

try:
    from accentts import _core  # installed wheel: the module sits in the package
except ImportError:  # pragma: no cover - development tree fallback
    # In a plain CMake build tree the module is a top-level `_core`; make it
    # addressable under the package name as well.
    import _core

    sys.modules[__name__ + "._core"] = _core

ParameterStore = _core.ParameterStore
acoustic = _core.acoustic
g2p = _core.g2p
lexicon = _core.lexicon
metrics = _core.metrics
signal = _core.signal
workbench = _core.workbench
read_f32_array = _core.read_f32_array
write_f32_array = _core.write_f32_array

__all__ = [
    "ParameterStore",
    "acoustic",
    "g2p",
    "lexicon",
    "metrics",
    "read_f32_array",
    "signal",
    "workbench",
    "write_f32_array",
]

__version__ = "0.1.0"
