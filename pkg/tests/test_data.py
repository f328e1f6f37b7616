"""Encoding-cache and batching tests against the generated corpus."""

import shutil

import numpy as np
import pytest

from dissonance.audio import read_wav
from dissonance.data import EncodedBatch, EncodedCorpus, MissingAudioError, encode_single
from dissonance.encoders import NUM_LAYERS


class TestEncodedCorpus:
    def test_counts_and_metadata(self, encoded_corpus, manifest):
        assert len(encoded_corpus) == 1800
        assert len(encoded_corpus.text_stacks) == 1800
        assert encoded_corpus.labels.shape == (1800,)
        assert set(encoded_corpus.splits) == {"train", "val", "test"}
        assert set(encoded_corpus.voices) == {"Jarnathan", "Juniper", "Eve"}
        assert encoded_corpus.sample_ids == [r["sample_id"] for r in manifest]

    def test_split_indices_partition(self, encoded_corpus):
        train = encoded_corpus.indices(split="train")
        val = encoded_corpus.indices(split="val")
        test = encoded_corpus.indices(split="test")
        assert len(train) == 1260 and len(val) == 270 and len(test) == 270
        together = np.concatenate([train, val, test])
        assert len(np.unique(together)) == 1800

    def test_voice_filters(self, encoded_corpus):
        eve = encoded_corpus.indices(voice="Eve")
        not_eve = encoded_corpus.indices(exclude_voice="Eve")
        assert len(eve) == 600 and len(not_eve) == 1200
        assert not set(eve) & set(not_eve)
        test_eve = encoded_corpus.indices(split="test", voice="Eve")
        assert 0 < len(test_eve) < 270

    def test_stack_shapes(self, encoded_corpus):
        for stack in encoded_corpus.text_stacks[:50]:
            assert stack.shape[0] == NUM_LAYERS and stack.shape[2] == 64
            assert stack.shape[1] >= 2
        for base in encoded_corpus.audio_bases[:50]:
            assert base.ndim == 2 and base.shape[1] == 64
            assert base.shape[0] >= 10

    def test_batch_padding_and_masks(self, encoded_corpus):
        idxs = encoded_corpus.indices(split="train")[:16]
        batch = encoded_corpus.batch(idxs)
        assert isinstance(batch, EncodedBatch)
        b, l, tt, d = batch.text_stack.shape
        assert (b, l, d) == (16, NUM_LAYERS, 64)
        assert batch.audio_gain.shape == (NUM_LAYERS, 64)
        for j, i in enumerate(idxs):
            n_tok = encoded_corpus.text_stacks[i].shape[1]
            n_frames = encoded_corpus.audio_bases[i].shape[0]
            assert batch.text_mask[j].sum() == n_tok
            assert batch.audio_mask[j].sum() == n_frames
            np.testing.assert_array_equal(
                batch.text_stack[j, :, :n_tok], encoded_corpus.text_stacks[i])
            assert np.all(batch.text_stack[j, :, n_tok:] == 0.0)
            np.testing.assert_array_equal(
                batch.audio_base[j, :n_frames], encoded_corpus.audio_bases[i])
            assert np.all(batch.audio_base[j, n_frames:] == 0.0)
        np.testing.assert_array_equal(batch.labels, encoded_corpus.labels[idxs])

    def test_empty_batch_rejected(self, encoded_corpus):
        with pytest.raises(ValueError):
            encoded_corpus.batch([])

    def test_iter_batches_covers_everything_once(self, encoded_corpus):
        idxs = encoded_corpus.indices(split="val")
        seen = []
        for batch in encoded_corpus.iter_batches(idxs, batch_size=64):
            seen.extend(batch.sample_ids)
        expected = [encoded_corpus.sample_ids[i] for i in idxs]
        assert seen == expected

    def test_iter_batches_shuffles_with_rng(self, encoded_corpus):
        idxs = encoded_corpus.indices(split="val")
        a = [s for b in encoded_corpus.iter_batches(idxs, 64, np.random.default_rng(1))
             for s in b.sample_ids]
        b = [s for b in encoded_corpus.iter_batches(idxs, 64, np.random.default_rng(2))
             for s in b.sample_ids]
        assert sorted(a) == sorted(b)
        assert a != b

    def test_missing_audio_aborts_with_ids(self, tmp_path, corpus_dir, manifest):
        broken = tmp_path / "broken"
        shutil.copytree(corpus_dir, broken)
        victims = [manifest[3]["audio_path"], manifest[77]["audio_path"]]
        for rel in victims:
            (broken / rel).unlink()
        with pytest.raises(MissingAudioError) as err:
            EncodedCorpus(manifest, broken, d=64)
        assert manifest[3]["sample_id"] in str(err.value)
        assert manifest[77]["sample_id"] in str(err.value)
        assert sorted(err.value.sample_ids) == sorted(
            [manifest[3]["sample_id"], manifest[77]["sample_id"]])

    def test_empty_manifest_rejected(self, corpus_dir):
        with pytest.raises(ValueError):
            EncodedCorpus([], corpus_dir, d=64)


class TestEncodeSingle:
    def test_matches_corpus_encoding(self, encoded_corpus, corpus_dir, manifest):
        """The live inference path must produce bit-identical features to
        the training-time cache for the same text and audio."""
        row = manifest[123]
        wave = read_wav(corpus_dir / row["audio_path"])
        single = encode_single(row["text"], wave, d=64,
                               encoder_seed=encoded_corpus.encoder_seed)
        np.testing.assert_array_equal(
            single.text_stack[0], encoded_corpus.text_stacks[123])
        np.testing.assert_array_equal(
            single.audio_base[0], encoded_corpus.audio_bases[123])
        np.testing.assert_array_equal(single.audio_gain, encoded_corpus.audio_encoder.layer_gain)
        assert single.text_mask.all() and single.audio_mask.all()
