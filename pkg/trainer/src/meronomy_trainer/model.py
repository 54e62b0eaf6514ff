"""Encoder plus classification head over the masked positions."""

from __future__ import annotations

import torch
from torch import nn
from transformers import BertConfig, BertModel

from .data import MASKS_PER_TASK, PAD_ID

N_LABELS = 3


def tiny_encoder_config(vocab_size: int) -> BertConfig:
    """A from-scratch encoder small enough to train on a CPU in seconds."""
    return BertConfig(
        vocab_size=vocab_size,
        hidden_size=64,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=128,
        max_position_embeddings=128,
    )


class MaskedTokenClassifier(nn.Module):
    """Classify a sentence from the encoder outputs at its masked slots.

    The aspect head reads the single masked position; the relation head
    concatenates the outputs at both masked positions before the linear
    layer. Both end in a 3-way softmax over the label scheme.
    """

    def __init__(self, encoder: nn.Module, n_masks: int):
        super().__init__()
        self.encoder = encoder
        self.n_masks = n_masks
        self.head = nn.Linear(encoder.config.hidden_size * n_masks, N_LABELS)

    def forward(
        self,
        input_ids: torch.Tensor,
        attention_mask: torch.Tensor,
        positions: torch.Tensor,
    ) -> torch.Tensor:
        states = self.encoder(
            input_ids=input_ids, attention_mask=attention_mask
        ).last_hidden_state
        rows = torch.arange(input_ids.shape[0], device=input_ids.device).unsqueeze(1)
        picked = states[rows, positions]
        return self.head(picked.reshape(picked.shape[0], -1))


def build_model(task: str, encoder_name: str, vocab_size: int | None) -> MaskedTokenClassifier:
    if encoder_name == "tiny":
        if vocab_size is None:
            raise ValueError("a from-scratch encoder needs the vocabulary size")
        encoder = BertModel(tiny_encoder_config(vocab_size))
    else:
        from transformers import AutoModel

        encoder = AutoModel.from_pretrained(encoder_name)
    return MaskedTokenClassifier(encoder, MASKS_PER_TASK[task])


def collate(
    batch: list[tuple[list[int], list[int], int | None]]
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor | None]:
    """Pad a batch of (ids, positions, label) to tensors."""
    width = max(len(ids) for ids, _, _ in batch)
    input_ids = torch.full((len(batch), width), PAD_ID, dtype=torch.long)
    attention = torch.zeros((len(batch), width), dtype=torch.long)
    positions = torch.zeros((len(batch), len(batch[0][1])), dtype=torch.long)
    for k, (ids, pos, _) in enumerate(batch):
        input_ids[k, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        attention[k, : len(ids)] = 1
        positions[k] = torch.tensor(pos, dtype=torch.long)
    labels = None
    if batch[0][2] is not None:
        labels = torch.tensor([lb for _, _, lb in batch], dtype=torch.long)
    return input_ids, attention, positions, labels
