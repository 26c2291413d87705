"""Shared fixtures: tiny offline checkpoints and a toy corpus.

Both checkpoints are built from scratch in a session temp directory so
the tests never touch the network. The encoder has a character-level
vocabulary, which makes content-token counts easy to predict: every
letter of a word becomes exactly one token.
"""

import os

os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")
os.environ.setdefault("TRANSFORMERS_VERBOSITY", "error")
os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")

import pytest
import torch

TOY_LINES = [
    "the cat sat on the mat",
    "a quick brown fox jumps over a dog",
    "rain fell on the quiet town all night",
    "she reads a worn book by the window",
    "green leaves turn gold in october",
    "the train left the station at noon",
    "waves broke gently on the dark shore",
    "he fixed the old clock with a pin",
    "a small bird sang from the high wire",
    "the soup needs more salt and pepper",
    "light spilled across the wooden floor",
    "they walked home under a pale moon",
    "dust settled on the empty shelves",
    "the river bends twice before the sea",
    "her garden grows mint and wild roses",
    "cold wind rattled the loose gate",
    "a candle flickered in the drafty hall",
    "the map showed a road that no longer exists",
    "bread and honey made a fine breakfast",
    "stars came out one by one over the field",
]


def content_letters(line: str) -> int:
    """Content tokens the character-level encoder produces for a line."""
    return sum(ch.isalpha() for ch in line)


@pytest.fixture(scope="session")
def bert_checkpoint(tmp_path_factory) -> str:
    """A two-layer masked-language encoder with a character vocabulary."""
    from tokenizers.implementations import BertWordPieceTokenizer
    from transformers import BertConfig, BertForMaskedLM, BertTokenizerFast

    root = tmp_path_factory.mktemp("tiny-bert")
    letters = list("abcdefghijklmnopqrstuvwxyz")
    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    tokens += letters + ["##" + ch for ch in letters]
    vocab = {token: i for i, token in enumerate(tokens)}
    wordpiece = BertWordPieceTokenizer(vocab=vocab, lowercase=True)
    tokenizer = BertTokenizerFast(
        tokenizer_object=wordpiece._tokenizer,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
        do_lower_case=True,
    )
    tokenizer.save_pretrained(root)
    config = BertConfig(
        vocab_size=len(tokens),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    torch.manual_seed(0)
    BertForMaskedLM(config).save_pretrained(root)
    return str(root)


@pytest.fixture(scope="session")
def gpt2_checkpoint(tmp_path_factory) -> str:
    """A two-layer causal model whose tokenizer has no mask token."""
    from tokenizers.implementations import ByteLevelBPETokenizer
    from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

    root = tmp_path_factory.mktemp("tiny-gpt2")
    bpe = ByteLevelBPETokenizer()
    bpe.train_from_iterator(
        TOY_LINES * 20,
        vocab_size=300,
        min_frequency=1,
        special_tokens=["<|endoftext|>"],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=bpe._tokenizer,
        eos_token="<|endoftext|>",
        model_max_length=64,
    )
    tokenizer.save_pretrained(root)
    config = GPT2Config(
        vocab_size=bpe.get_vocab_size(),
        n_positions=64,
        n_embd=32,
        n_layer=2,
        n_head=2,
    )
    torch.manual_seed(0)
    GPT2LMHeadModel(config).save_pretrained(root)
    return str(root)


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory) -> str:
    """Twenty short lowercase lines, one sequence per line."""
    path = tmp_path_factory.mktemp("corpus") / "toy.txt"
    path.write_text("\n".join(TOY_LINES) + "\n", encoding="utf-8")
    return str(path)


@pytest.fixture
def job_factory(tmp_path, bert_checkpoint, toy_corpus):
    """Jobs against the tiny encoder and toy corpus, each with a fresh out dir."""
    import itertools

    from lidscope_extract import ExtractionJob

    counter = itertools.count()

    def make(**overrides):
        kwargs = dict(
            corpus=toy_corpus,
            corpus_kind="plain-text-lines",
            model=bert_checkpoint,
            layers=(0, -1),
            mode="regular",
            out=str(tmp_path / f"out{next(counter)}"),
            max_length=64,
        )
        kwargs.update(overrides)
        return ExtractionJob(**kwargs)

    return make
