"""Extraction of prices and tagged text from LLM replies."""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass

from ...errors import MalformedResponse, NonPositivePrice, RoundMismatchWarning

_NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_ROUND = re.compile(r"<round>\s*(\d+)\s*</round>", re.S)
_RATIONALE = re.compile(r"<rationale>(.*?)</rationale>", re.S)
_STRATEGY = re.compile(r"<strategy>(.*?)</strategy>", re.S)


@dataclass(frozen=True)
class ParsedResponse:
    price: float
    raw: str
    prices: tuple[float, ...] = ()
    is_list: bool = False
    round_echo: int | None = None
    rationale: str = ""
    strategy: str = ""


def boxed_contents(text: str) -> list[str]:
    r"""Contents of every ``\boxed{...}``, with nested braces balanced."""
    out = []
    start = 0
    while True:
        k = text.find("\\boxed{", start)
        if k < 0:
            return out
        i = k + len("\\boxed{")
        depth = 1
        j = i
        while j < len(text) and depth:
            if text[j] == "{":
                depth += 1
            elif text[j] == "}":
                depth -= 1
            j += 1
        if depth:
            return out
        out.append(text[i:j - 1])
        start = j


def _numbers(content: str) -> list[float]:
    # drop LaTeX commands such as \text or \$ before scanning for numerals
    cleaned = re.sub(r"\\[A-Za-z]+", " ", content).replace("\\$", " ").replace(",", " , ")
    return [float(m) for m in _NUMBER.findall(cleaned)]


def _answer_region(text: str) -> str:
    """Text after the last closing think tag, where the final answer lives."""
    k = text.rfind("</think>")
    return text[k + len("</think>"):] if k >= 0 else text


def _first_tag(pattern: re.Pattern, region: str, text: str):
    m = pattern.search(region) or pattern.search(text)
    return m


def parse_response(text: str, expected_round: int | None = None) -> ParsedResponse:
    r"""Parse an LLM reply.

    The price is the first ``\boxed{}`` holding a number, searched after the
    last ``</think>`` first and then in the whole text. A boxed list such as
    ``\boxed{[2.95, 3.05]}`` yields ``is_list=True`` with every price in
    ``prices``. A wrong ``<round>`` echo only warns.
    """
    if text is None:
        raise MalformedResponse("empty response")
    region = _answer_region(text)
    found = None
    for source in (region, text):
        for content in boxed_contents(source):
            nums = _numbers(content)
            if nums:
                found = (content, nums)
                break
        if found:
            break
    if found is None:
        raise MalformedResponse("no boxed numeric value in response")
    content, nums = found
    if not all(math.isfinite(x) for x in nums):
        raise MalformedResponse(f"non-finite boxed value: {content!r}")
    if any(x <= 0 for x in nums):
        raise NonPositivePrice(f"non-positive price in {content!r}")
    is_list = len(nums) > 1 or "[" in content or "," in content

    m = _first_tag(_ROUND, region, text)
    echo = int(m.group(1)) if m else None
    if echo is not None and expected_round is not None and echo != expected_round:
        warnings.warn(f"round echo {echo} differs from prompted round {expected_round}",
                      RoundMismatchWarning, stacklevel=2)
    rat = _first_tag(_RATIONALE, region, text)
    strat = _first_tag(_STRATEGY, region, text)
    return ParsedResponse(price=nums[0], raw=text, prices=tuple(nums), is_list=is_list,
                          round_echo=echo,
                          rationale=rat.group(1).strip() if rat else "",
                          strategy=strat.group(1).strip() if strat else "")


def format_response(round_: int, price: float, rationale: str = "", strategy: str = "") -> str:
    """A well-formed reply in the requested template, as a mock model would write it."""
    return (f"<round>{round_}</round>\n"
            f"My chosen price: \\boxed{{{float(price)!r}}}.\n"
            f"<rationale>\n  {rationale}\n</rationale>\n"
            f"<strategy>\n  {strategy}\n</strategy>\n")
