"""Project configuration: languages, filter rules, quantizer, pricing, adapters."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from corpusforge.adapters import STAGES, AdapterBinding
from corpusforge.domain import PricingTable
from corpusforge.errors import ValidationError
from corpusforge.filtering import FilterRuleSet
from corpusforge.triage import QuantizerConfig


def _default_adapters() -> dict[str, AdapterBinding]:
    return {stage: AdapterBinding(stage=stage) for stage in STAGES}


@dataclass
class ProjectConfig:
    source_lang: str = "en"
    target_lang: str = "ko"
    filter_rules: FilterRuleSet = field(default_factory=FilterRuleSet)
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    pricing: PricingTable = field(default_factory=PricingTable)
    adapters: dict[str, AdapterBinding] = field(default_factory=_default_adapters)

    def validate(self) -> None:
        if not self.source_lang or not self.target_lang:
            raise ValidationError("source_lang and target_lang must be non-empty")
        self.filter_rules.validate()
        self.quantizer.validate()
        self.pricing.validate()
        for stage in STAGES:
            if stage not in self.adapters:
                raise ValidationError(f"stage {stage!r} has no adapter binding")
            binding = self.adapters[stage]
            if binding.stage != stage:
                raise ValidationError(
                    f"binding under key {stage!r} declares stage {binding.stage!r}"
                )
            binding.validate()
        for stage in self.adapters:
            if stage not in STAGES:
                raise ValidationError(f"unknown stage {stage!r} in adapters map")

    def to_dict(self) -> dict:
        return {
            "source_lang": self.source_lang,
            "target_lang": self.target_lang,
            "filter_rules": self.filter_rules.to_dict(),
            "quantizer": self.quantizer.to_dict(),
            "pricing": self.pricing.to_dict(),
            "adapters": {stage: self.adapters[stage].to_dict() for stage in STAGES},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectConfig":
        config = cls(
            source_lang=data.get("source_lang", "en"),
            target_lang=data.get("target_lang", "ko"),
            filter_rules=FilterRuleSet.from_dict(data.get("filter_rules", {})),
            quantizer=QuantizerConfig.from_dict(data.get("quantizer", {})),
            pricing=(
                PricingTable.from_dict(data["pricing"])
                if "pricing" in data
                else PricingTable()
            ),
            adapters={
                **_default_adapters(),
                **{
                    stage: AdapterBinding.from_dict(stage, binding)
                    for stage, binding in data.get("adapters", {}).items()
                },
            },
        )
        config.validate()
        return config

    def fingerprint(self) -> str:
        """Stable hash of the canonical config JSON; equal configs hash equal."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
