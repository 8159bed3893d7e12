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

"""Python smoke tests for the accentts extension module.

Runs as a plain script (no pytest dependency): every check raises on
failure and the script prints one OK line per area.
"""

import math
import os
import sys
import tempfile


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def check_metrics(core):
    m = core.metrics
    approx(m.per([1, 2, 3], [1, 3]), 1.0 / 3.0)
    approx(m.wer([1, 2, 9, 3, 4], [1, 2, 9, 3, 5], 9), 0.5)
    approx(m.kld_posteriorgram([[0.5, 0.5]], [[0.5, 0.5]]), 0.0)
    approx(m.kld_posteriorgram([[0.5, 0.5]], [[0.25, 0.75]]), 0.14384, 1e-4)
    pairs, cost = m.dtw_align([[0.0, 1.0]], [[0.0, 1.0], [0.0, 1.0]])
    assert pairs == [(0, 0), (0, 1)]
    approx(cost, 0.0)
    path = m.identity_path(2)
    approx(m.f0_rmse([100.0, 200.0], [True, True], [110.0, 190.0], [True, True], path), 10.0)
    approx(m.frame_disturbance(path), 0.0)
    approx(m.duration_rmse_ms([10.0, 20.0], [12.0, 18.0]), 25.0)
    print("OK metrics")


def check_signal(core):
    s = core.signal
    samples = [0.5 * math.sin(2 * math.pi * 220.0 * i / s.SAMPLE_RATE) for i in range(8000)]
    mel = s.mel_spectrogram(samples)
    assert len(mel[0]) == 80
    f0, voiced = s.estimate_f0(samples)
    assert len(f0) == len(mel)
    voiced_f0 = sorted(v for v, flag in zip(f0, voiced) if flag)
    assert voiced_f0, "expected voiced frames on a tone"
    median = voiced_f0[len(voiced_f0) // 2]
    assert abs(median - 220.0) <= 3.0, median
    interp = s.interpolate_unvoiced([100.0, 0.0, 0.0, 200.0], [True, False, False, True])
    approx(interp[1], 100.0 + 100.0 / 3.0)
    durs = s.durations_from_alignment([(0, 0, 10), (1, 10, 14)])
    approx(durs[0], math.log(10.0))
    wave = s.invert_mel(mel, 8)
    assert len(wave) >= len(mel) * s.HOP_SAMPLES
    print("OK signal")


def check_lexicon(core, tmpdir):
    lx = core.lexicon
    inv = lx.PhonemeInventory.make(["d", "ei", "ae", "i", "g", "ou"], ["ei", "ae", "i", "ou"])
    assert len(inv) == 10  # 4 specials + 6 phonemes
    path = os.path.join(tmpdir, "lex.tsv")
    with open(path, "w", encoding="utf-8") as f:
        f.write("day\td ei\ngo\tg ou\n")
    lex, dups = lx.load_lexicon(path, 0, inv)
    assert dups == 0
    assert len(lex) == 2
    assert lex.transcription("day") == [inv.index("d"), inv.index("ei")]

    path_b = os.path.join(tmpdir, "lex_b.tsv")
    with open(path_b, "w", encoding="utf-8") as f:
        f.write("day\td ae i\ngo\tg ou\n")
    lex_b, _ = lx.load_lexicon(path_b, 1, inv)
    stats = lx.compare_lexicons(lex, lex_b, inv)
    approx(stats["shared_word_pct"], 50.0)
    approx(stats["vowel_variation_pct"], 100.0)
    assert lx.normalize_text("The DAY!") == "the day"
    print("OK lexicon")


def check_pipeline(core, tmpdir):
    wb = core.workbench
    corpus = os.path.join(tmpdir, "corpus")
    report = wb.run_pipeline(
        "make-toy-corpus",
        {
            "seed": "5",
            "out": corpus,
            "toy.words": "16",
            "toy.heldout_words": "4",
            "toy.finetune_words": "8",
            "toy.utterances": "2",
            "toy.test_utterances": "1",
        },
    )
    assert report["metrics"]["accents"] == 3
    assert os.path.exists(os.path.join(corpus, "utts.jsonl"))

    g2p_out = os.path.join(tmpdir, "g2p")
    report = wb.run_pipeline(
        "pretrain-g2p",
        {
            "seed": "6",
            "corpus": corpus,
            "out": g2p_out,
            "accents": "gen,alt",
            "len_min": "1",
            "model_dim": "16",
            "encoder_layers": "1",
            "decoder_layers": "1",
            "heads": "2",
            "ff_dim": "24",
            "accent_dim": "4",
            "epochs": "2",
            "batch": "16",
        },
    )
    ckpt = report["paths"]["checkpoint"]
    store = core.ParameterStore.load(ckpt)
    assert store.model_kind == "g2p"
    assert "encoder_stack" in store.group_names()
    mask = set(core.g2p.trainable_mask("finetune"))
    assert "encoder_stack" not in mask and "output_projection" in mask
    phonemes, truncated = core.g2p.decode(store, [1, 2, 3], 0, 8)
    assert len(phonemes) <= 8
    assert isinstance(truncated, bool)
    print("OK pipeline")


def main():
    import accentts as core

    with tempfile.TemporaryDirectory(prefix="accentts_py_smoke") as tmpdir:
        check_metrics(core)
        check_signal(core)
        check_lexicon(core, tmpdir)
        check_pipeline(core, tmpdir)
    print("python smoke tests passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
