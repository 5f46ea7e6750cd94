"""Materialize a small seeded BERT-style checkpoint for offline serving.

The WordPiece vocabulary covers printable ASCII as single characters plus
their "##" continuation pieces, so any word splits into character pieces
instead of collapsing to [UNK]. Weights are seeded, so the checkpoint is
reproducible. Where a real checkpoint is available, serve that instead; this
exists for environments with no model hub access.
"""

from __future__ import annotations

import string
from pathlib import Path

import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def build_vocab() -> dict[str, int]:
    chars = list(string.ascii_lowercase + string.digits) + list(".,;:!?$%&'\"()-_/@#+*=")
    pieces = SPECIALS + chars + [f"##{c}" for c in chars]
    return {piece: i for i, piece in enumerate(pieces)}


def build_tokenizer(vocab: dict[str, int]) -> PreTrainedTokenizerFast:
    wordpiece = models.WordPiece(vocab=vocab, unk_token="[UNK]", continuing_subword_prefix="##")
    tokenizer = Tokenizer(wordpiece)
    tokenizer.normalizer = normalizers.BertNormalizer(lowercase=True)
    tokenizer.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    tokenizer.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        model_max_length=512,
    )


def build(out_dir: Path, dim: int, layers: int, heads: int, seed: int) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = build_vocab()
    tokenizer = build_tokenizer(vocab)
    tokenizer.save_pretrained(out_dir)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=dim,
        num_hidden_layers=layers,
        num_attention_heads=heads,
        intermediate_size=dim * 2,
        max_position_embeddings=512,
        pad_token_id=vocab["[PAD]"],
    )
    torch.manual_seed(seed)
    model = BertModel(config)
    model.eval()
    model.save_pretrained(out_dir)
    print(f"wrote tiny encoder (dim={dim}, layers={layers}, vocab={len(vocab)}) -> {out_dir}")
