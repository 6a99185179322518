"""Vocabulary and value generators for synthetic invoice fields."""

from __future__ import annotations

from typing import Callable, Optional

from ...rng import Xoshiro256

COMPANY_NAMES = (
    "acme", "globex", "initech", "umbrella", "stark", "wayne",
    "hooli", "vandelay", "soylent", "tyrell", "wonka", "nakatomi",
)
COMPANY_SUFFIXES = ("ltd", "inc", "sarl", "gmbh", "corp", "sa")
CURRENCIES = ("eur", "usd", "chf")
GENERIC_WORDS = ("alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "lambda")
FILLER_WORDS = (
    "page", "thank", "you", "item", "qty", "description", "vat", "net",
    "ref", "payment", "terms", "due", "bank", "iban", "phone", "email",
)


def _company(rng: Xoshiro256) -> list[str]:
    words = [rng.choice(COMPANY_NAMES)]
    if rng.bernoulli(0.5):
        words.append(rng.choice(COMPANY_NAMES))
    words.append(rng.choice(COMPANY_SUFFIXES))
    return words


def _invoice_info(rng: Xoshiro256) -> list[str]:
    words = [f"inv-{rng.randint(1000, 99999)}"]
    if rng.bernoulli(0.6):
        words.append(f"{rng.randint(1, 28):02d}/{rng.randint(1, 12):02d}/{rng.randint(2015, 2024)}")
    return words


def _amount(rng: Xoshiro256) -> list[str]:
    words = [f"{rng.randint(1, 9999)}.{rng.randint(0, 99):02d}"]
    if rng.bernoulli(0.5):
        words.append(rng.choice(CURRENCIES))
    return words


def _generic(rng: Xoshiro256) -> list[str]:
    return [rng.choice(GENERIC_WORDS) for _ in range(rng.randint(1, 3))]


_GENERATORS: dict[str, Callable[[Xoshiro256], list[str]]] = {
    "receiver": _company,
    "supplier": _company,
    "invoice_info": _invoice_info,
    "total": _amount,
}


def value_tokens(rng: Xoshiro256, field_name: str, count: Optional[int] = None) -> list[str]:
    """Draw the tokens of a value for ``field_name``; exactly ``count`` when given."""

    generator = _GENERATORS.get(field_name, _generic)
    tokens = generator(rng)
    if count is not None:
        while len(tokens) < count:
            tokens.extend(generator(rng))
        tokens = tokens[:count]
    return tokens


def filler_tokens(rng: Xoshiro256) -> list[str]:
    return [rng.choice(FILLER_WORDS) for _ in range(rng.randint(1, 3))]


def keyword(field_name: str) -> str:
    """Unique label token printed before a field value in text-keyed pages."""

    return f"{field_name}:"
