"""Text processing: sentence segmentation, subword tokenization, term vectors.

The tokenizer splits words into vocabulary pieces by greedy longest-prefix
matching, with ``##`` marking word-internal continuation pieces, so
technical strings decompose into known parts instead of collapsing to the
unknown token. The vocabulary itself is built by iterative pair merging
starting from single characters.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

PAD_TOKEN = "[PAD]"
UNK_TOKEN = "[UNK]"
CONTINUATION_MARKER = "##"

# Words longer than this go straight to the unknown token.
MAX_WORD_CHARS = 100

DEFAULT_ABBREVIATIONS = ("e.g.", "i.e.", "et al.", "Fig.", "vs.", "Dr.")


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

def segment_sentences(text: str, abbreviations=DEFAULT_ABBREVIATIONS) -> list[str]:
    """Split text into sentences with simple, auditable rules.

    A sentence boundary is a ``.``, ``!`` or ``?`` followed by whitespace
    and an uppercase letter or digit, outside parentheses, where the
    period does not terminate a listed abbreviation. Whitespace-only input
    yields an empty list.
    """
    if not text.strip():
        return []
    sentences: list[str] = []
    start = 0
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth = max(0, depth - 1)
        elif ch in ".!?" and depth == 0:
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            if j > i + 1 and j < n and (text[j].isupper() or text[j].isdigit()):
                if not (ch == "." and _ends_with_abbreviation(text, i, abbreviations)):
                    piece = text[start : i + 1].strip()
                    if piece:
                        sentences.append(piece)
                    start = j
                    i = j
                    continue
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _ends_with_abbreviation(text: str, period_index: int, abbreviations) -> bool:
    head = text[: period_index + 1]
    for abbr in abbreviations:
        if head.endswith(abbr):
            k = len(head) - len(abbr)
            if k == 0 or not text[k - 1].isalnum():
                return True
    return False


def load_abbreviations(path: str | Path) -> tuple[str, ...]:
    """One abbreviation per line, blank lines ignored."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())


# ---------------------------------------------------------------------------
# Subword vocabulary
# ---------------------------------------------------------------------------

@dataclass
class Vocabulary:
    token_to_id: dict[str, int]
    marker: str = CONTINUATION_MARKER

    def __post_init__(self):
        self.id_to_token = [None] * len(self.token_to_id)
        for tok, i in self.token_to_id.items():
            self.id_to_token[i] = tok
        self.pad_id = self.token_to_id[PAD_TOKEN]
        self.unk_id = self.token_to_id[UNK_TOKEN]

    def __len__(self) -> int:
        return len(self.token_to_id)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def save(self, path: str | Path) -> None:
        Path(path).write_text("\n".join(self.id_to_token) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        tokens = Path(path).read_text(encoding="utf-8").splitlines()
        tokens = [t for t in tokens if t]
        mapping = {tok: i for i, tok in enumerate(tokens)}
        if len(mapping) != len(tokens):
            raise DataError(f"duplicate tokens in vocabulary file {path}")
        for reserved in (PAD_TOKEN, UNK_TOKEN):
            if reserved not in mapping:
                raise DataError(f"vocabulary file {path} missing reserved token {reserved}")
        return cls(mapping)


def _safe_lower(word: str) -> str:
    # Per-character lowering keeps a 1:1 index alignment with the original
    # word (str.lower can change length for a handful of codepoints).
    return "".join(c.lower() if len(c.lower()) == 1 else c for c in word)


def _word_symbols(word: str) -> list[str]:
    return [word[0]] + [CONTINUATION_MARKER + ch for ch in word[1:]]


def build_vocab(corpus: list[str], max_size: int, min_frequency: int = 2) -> Vocabulary:
    """Build a merge-based subword vocabulary from scratch.

    Starts from the character alphabet (word-initial characters plain,
    word-internal ones carrying the continuation marker) and repeatedly
    merges the most frequent adjacent symbol pair, lexicographically
    smallest pair first on ties, until ``max_size`` tokens exist or no
    pair reaches ``min_frequency``.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    n_reserved = 2
    if max_size <= n_reserved:
        raise ValueError(f"max_size must exceed the {n_reserved} reserved tokens")

    word_freq: dict[str, int] = {}
    for text in corpus:
        for word in text.split():
            word = _safe_lower(word)
            word_freq[word] = word_freq.get(word, 0) + 1

    sequences: dict[str, list[str]] = {w: _word_symbols(w) for w in word_freq}

    alphabet_freq: dict[str, int] = {}
    for w, seq in sequences.items():
        for sym in seq:
            alphabet_freq[sym] = alphabet_freq.get(sym, 0) + word_freq[w]
    alphabet = sorted(alphabet_freq)
    if n_reserved + len(alphabet) > max_size:
        alphabet = sorted(
            sorted(alphabet), key=lambda s: -alphabet_freq[s]
        )[: max_size - n_reserved]
        alphabet.sort()

    tokens: list[str] = [PAD_TOKEN, UNK_TOKEN] + alphabet
    seen = set(tokens)

    min_frequency = max(1, min_frequency)
    while len(tokens) < max_size:
        pair_counts: dict[tuple[str, str], int] = {}
        for w, seq in sequences.items():
            f = word_freq[w]
            for a, b in zip(seq, seq[1:]):
                pair_counts[(a, b)] = pair_counts.get((a, b), 0) + f
        if not pair_counts:
            break
        best = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        if pair_counts[best] < min_frequency:
            break
        a, b = best
        merged = a + (b[len(CONTINUATION_MARKER):] if b.startswith(CONTINUATION_MARKER) else b)
        for w, seq in sequences.items():
            if len(seq) < 2:
                continue
            out = []
            k = 0
            while k < len(seq):
                if k + 1 < len(seq) and seq[k] == a and seq[k + 1] == b:
                    out.append(merged)
                    k += 2
                else:
                    out.append(seq[k])
                    k += 1
            sequences[w] = out
        if merged not in seen:
            tokens.append(merged)
            seen.add(merged)

    return Vocabulary({tok: i for i, tok in enumerate(tokens)})


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TokenSequence:
    """Token ids plus the byte span of the input each token covers."""

    token_ids: tuple[int, ...]
    spans: tuple[tuple[int, int], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.token_ids)


def tokenize(text: str, vocab: Vocabulary) -> TokenSequence:
    """Greedy longest-prefix subword tokenization of whitespace words.

    Any word that cannot be fully covered by vocabulary pieces maps to the
    single unknown token spanning the whole word.
    """
    byte_offsets = [0]
    for ch in text:
        byte_offsets.append(byte_offsets[-1] + len(ch.encode("utf-8")))

    ids: list[int] = []
    spans: list[tuple[int, int]] = []
    for match in re.finditer(r"\S+", text):
        word = match.group()
        w_start = match.start()
        lowered = _safe_lower(word)
        pieces = _match_word(lowered, vocab)
        if pieces is None:
            ids.append(vocab.unk_id)
            spans.append((byte_offsets[w_start], byte_offsets[match.end()]))
            continue
        for start, end, token in pieces:
            ids.append(vocab.token_to_id[token])
            spans.append((byte_offsets[w_start + start], byte_offsets[w_start + end]))
    return TokenSequence(tuple(ids), tuple(spans))


def _match_word(word: str, vocab: Vocabulary) -> list[tuple[int, int, str]] | None:
    if len(word) > MAX_WORD_CHARS:
        return None
    pieces = []
    start = 0
    n = len(word)
    while start < n:
        end = n
        found = None
        while end > start:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION_MARKER + candidate
            if candidate in vocab:
                found = candidate
                break
            end -= 1
        if found is None:
            return None
        pieces.append((start, end, found))
        start = end
    return pieces


# ---------------------------------------------------------------------------
# Term vectors and cosine similarity
# ---------------------------------------------------------------------------

_NON_TERM = re.compile(r"[^\w.\-]+")
_INITIALS = re.compile(r"^(?:[^\W\d_]\.-?)+$")


def term_vector(text: str) -> dict[str, int]:
    """Lowercased word counts with punctuation stripped.

    Intra-token hyphens and periods survive (so page ranges and dotted
    initials stay single terms); everything else separates terms.
    """
    counts: dict[str, int] = {}
    cleaned = _NON_TERM.sub(" ", text.lower())
    for raw in cleaned.split():
        term = raw if _INITIALS.match(raw) else raw.strip(".-")
        if term:
            counts[term] = counts.get(term, 0) + 1
    return counts


def cosine_similarity(a: dict[str, int], b: dict[str, int]) -> float:
    """Cosine of two sparse count vectors; 0.0 when either is empty."""
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(count * b[term] for term, count in a.items() if term in b)
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)
