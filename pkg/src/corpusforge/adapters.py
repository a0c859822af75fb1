"""Pluggable stage adapters: GEC, NMT, APE, QE.

Each stage runs behind an AdapterBinding that is either ``builtin``
(deterministic local reference implementation, pure functions from the
kernel layer) or ``remote`` (JSON over HTTP).  Remote batches are chunked
and issued with bounded concurrency; a failed chunk surfaces a
StageFailure listing every unprocessed id, never partial silent output.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from urllib.parse import urlparse

import httpx

from corpusforge import kernels
from corpusforge.errors import StageFailure, ValidationError

STAGES = ("gec", "nmt", "ape", "qe")

DEFAULT_BUILTIN_IDS = {
    "gec": "builtin-gec",
    "nmt": "builtin-nmt",
    "ape": "builtin-ape",
    "qe": "builtin-qe",
}

# Reserved builtin id that fails every batch; used to exercise the
# pipeline's no-partial-writes guarantee without a network.
FAULT_ADAPTER_ID = "fault"


@dataclass
class AdapterBinding:
    stage: str
    kind: str = "builtin"
    adapter_id: str = ""
    endpoint: str | None = None
    timeout_ms: int = 10000
    max_batch: int = 32
    max_in_flight: int = 4
    bearer_token: str | None = None

    def __post_init__(self):
        if not self.adapter_id:
            self.adapter_id = DEFAULT_BUILTIN_IDS.get(self.stage, "")

    def validate(self) -> None:
        if self.stage not in STAGES:
            raise ValidationError(f"unknown stage {self.stage!r}")
        if self.kind not in ("builtin", "remote"):
            raise ValidationError(f"unknown adapter kind {self.kind!r}")
        if not self.adapter_id:
            raise ValidationError(f"adapter for stage {self.stage} has no id")
        if self.kind == "remote":
            parsed = urlparse(self.endpoint or "")
            if parsed.scheme not in ("http", "https") or not parsed.netloc:
                raise ValidationError(
                    f"remote adapter {self.adapter_id!r} needs a valid http(s) endpoint"
                )
        if self.timeout_ms < 1:
            raise ValidationError("timeout_ms must be >= 1")
        if self.max_batch < 1:
            raise ValidationError("max_batch must be >= 1")
        if self.max_in_flight < 1:
            raise ValidationError("max_in_flight must be >= 1")

    def to_dict(self) -> dict:
        body = {
            "stage": self.stage,
            "kind": self.kind,
            "adapter_id": self.adapter_id,
            "timeout_ms": self.timeout_ms,
            "max_batch": self.max_batch,
            "max_in_flight": self.max_in_flight,
        }
        if self.endpoint is not None:
            body["endpoint"] = self.endpoint
        if self.bearer_token is not None:
            body["bearer_token"] = self.bearer_token
        return body

    @classmethod
    def from_dict(cls, stage: str, data: dict) -> "AdapterBinding":
        binding = cls(
            stage=stage,
            kind=data.get("kind", "builtin"),
            adapter_id=data.get("adapter_id", ""),
            endpoint=data.get("endpoint"),
            timeout_ms=data.get("timeout_ms", 10000),
            max_batch=data.get("max_batch", 32),
            max_in_flight=data.get("max_in_flight", 4),
            bearer_token=data.get("bearer_token"),
        )
        binding.validate()
        return binding


def _client_for(binding: AdapterBinding) -> httpx.Client:
    """One client per request batch; tests swap this out for a mock transport."""
    return httpx.Client(timeout=binding.timeout_ms / 1000.0)


def _builtin_output(stage: str, item: dict):
    if stage == "gec":
        return kernels.correct_grammar(item["source_text"])
    if stage == "nmt":
        return kernels.mock_translate(item["source_text"])
    if stage == "ape":
        return kernels.post_edit(item["source_text"], item["target_text"])
    return kernels.quality_score(item["source_text"], item["target_text"])


def _post_chunk(binding: AdapterBinding, payload: dict) -> dict:
    headers = {}
    if binding.bearer_token:
        headers["Authorization"] = f"Bearer {binding.bearer_token}"
    with _client_for(binding) as client:
        try:
            response = client.post(binding.endpoint, json=payload, headers=headers)
        except httpx.TimeoutException:
            # One retry on timeout only; protocol errors are deterministic.
            response = client.post(binding.endpoint, json=payload, headers=headers)
    if response.status_code != 200:
        raise StageFailure(
            f"adapter {binding.adapter_id!r} returned HTTP {response.status_code}",
            stage=binding.stage,
        )
    try:
        body = response.json()
    except ValueError:
        raise StageFailure(
            f"adapter {binding.adapter_id!r} returned non-JSON body",
            stage=binding.stage,
        ) from None
    return body


def _parse_chunk_response(stage: str, binding: AdapterBinding, sent_ids: list[str], body) -> dict:
    if not isinstance(body, dict) or not isinstance(body.get("items"), list):
        raise StageFailure(
            f"adapter {binding.adapter_id!r}: response has no items list", stage=stage
        )
    outputs = {}
    for item in body["items"]:
        if not isinstance(item, dict) or "id" not in item:
            raise StageFailure(
                f"adapter {binding.adapter_id!r}: response item without id", stage=stage
            )
        item_id = item["id"]
        if item_id in outputs:
            raise StageFailure(
                f"adapter {binding.adapter_id!r}: duplicate response id {item_id!r}",
                stage=stage,
            )
        if stage == "qe":
            score = item.get("score")
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise StageFailure(
                    f"adapter {binding.adapter_id!r}: non-numeric score for id {item_id!r}",
                    stage=stage,
                )
            if not (0.0 <= score <= 1.0):
                raise StageFailure(
                    f"adapter {binding.adapter_id!r}: score {score} out of [0,1] "
                    f"for id {item_id!r}",
                    stage=stage,
                )
            outputs[item_id] = float(score)
        else:
            text = item.get("output_text")
            if not isinstance(text, str):
                raise StageFailure(
                    f"adapter {binding.adapter_id!r}: missing output_text for id {item_id!r}",
                    stage=stage,
                )
            outputs[item_id] = text
    if sorted(outputs) != sorted(sent_ids):
        raise StageFailure(
            f"adapter {binding.adapter_id!r}: response ids are not a permutation "
            f"of the request ids",
            stage=stage,
        )
    return outputs


def invoke_stage(
    binding: AdapterBinding,
    stage: str,
    items: list[dict],
    source_lang: str = "",
    target_lang: str = "",
) -> dict:
    """Run one stage over items [{id, source_text, target_text?}] -> {id: output}.

    Output values are edited text for gec/nmt/ape and a float in [0,1]
    for qe.  Raises StageFailure carrying every unprocessed id if any
    chunk fails.
    """
    binding.validate()
    if stage != binding.stage:
        raise ValidationError(f"binding for {binding.stage} used for stage {stage}")
    if not items:
        raise ValidationError(f"{stage} batch must be non-empty")
    ids = [item["id"] for item in items]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"{stage} batch has duplicate item ids")

    if binding.kind == "builtin":
        if binding.adapter_id == FAULT_ADAPTER_ID:
            raise StageFailure(
                f"adapter {FAULT_ADAPTER_ID!r} fails by design",
                stage=stage,
                failed_ids=ids,
            )
        return {item["id"]: _builtin_output(stage, item) for item in items}

    chunks = [items[i : i + binding.max_batch] for i in range(0, len(items), binding.max_batch)]
    outputs: dict = {}
    failed: list[str] = []
    first_error: StageFailure | None = None

    def run_chunk(chunk: list[dict]) -> dict:
        payload = {
            "stage": stage,
            "source_lang": source_lang,
            "target_lang": target_lang,
            "items": chunk,
        }
        body = _post_chunk(binding, payload)
        return _parse_chunk_response(stage, binding, [c["id"] for c in chunk], body)

    with ThreadPoolExecutor(max_workers=binding.max_in_flight) as pool:
        futures = [pool.submit(run_chunk, chunk) for chunk in chunks]
        for chunk, future in zip(chunks, futures):
            try:
                outputs.update(future.result())
            except StageFailure as exc:
                failed.extend(item["id"] for item in chunk)
                if first_error is None:
                    first_error = exc
            except httpx.HTTPError as exc:
                failed.extend(item["id"] for item in chunk)
                if first_error is None:
                    first_error = StageFailure(
                        f"adapter {binding.adapter_id!r}: {exc.__class__.__name__}: {exc}",
                        stage=stage,
                    )
    if failed:
        assert first_error is not None
        raise StageFailure(first_error.message, stage=stage, failed_ids=failed)
    return outputs


def _ordered(ids: list[str], outputs: dict) -> list:
    return [outputs[item_id] for item_id in ids]


def gec_correct(batch: list[str], binding: AdapterBinding, source_lang: str = "") -> list[str]:
    items = [{"id": f"b{i}", "source_text": text} for i, text in enumerate(batch)]
    return _ordered([i["id"] for i in items], invoke_stage(binding, "gec", items, source_lang))


def nmt_translate(
    batch: list[str], binding: AdapterBinding, source_lang: str = "", target_lang: str = ""
) -> list[str]:
    items = [{"id": f"b{i}", "source_text": text} for i, text in enumerate(batch)]
    return _ordered(
        [i["id"] for i in items],
        invoke_stage(binding, "nmt", items, source_lang, target_lang),
    )


def ape_edit(
    batch: list[tuple[str, str]],
    binding: AdapterBinding,
    source_lang: str = "",
    target_lang: str = "",
) -> list[str]:
    items = [
        {"id": f"b{i}", "source_text": source, "target_text": target}
        for i, (source, target) in enumerate(batch)
    ]
    return _ordered(
        [i["id"] for i in items],
        invoke_stage(binding, "ape", items, source_lang, target_lang),
    )


def qe_score(
    batch: list[tuple[str, str]],
    binding: AdapterBinding,
    source_lang: str = "",
    target_lang: str = "",
) -> list[float]:
    items = [
        {"id": f"b{i}", "source_text": source, "target_text": target}
        for i, (source, target) in enumerate(batch)
    ]
    return _ordered(
        [i["id"] for i in items],
        invoke_stage(binding, "qe", items, source_lang, target_lang),
    )
