"""Classifier backends: reply parsing, deterministic matching, LLM wrapper."""

from __future__ import annotations

import json

import httpx
import pytest
from hypothesis import given, strategies as st

from orantest.backends import HttpBackendConfig, HttpChatClient, RetryPolicy, \
    ScriptedChatClient
from orantest.classifier import (
    ClassificationError,
    DeterministicClassifier,
    Label,
    LlmClassifier,
    MatchRules,
    MatchRuleError,
    ReplyParseError,
    deterministic_match,
    normalize_token,
    parse_classifier_reply,
)
from orantest.flows import FlowStep
from orantest.logs import parse_log_file

APPENDIX_REPLY = (
    "Label:\n"
    "Yes\n"
    "Confidence Score:\n"
    "100%\n"
    "Explanation:\n"
    "The log file contains the exact message name \"UEContextReleaseRequest\" "
    "which matches the message name in the test case step."
)

APPENDIX_STEP = FlowStep.from_description(
    1,
    "The gNB-DU sends a UE CONTEXT RELEASE REQUEST to the gNB-CU, "
    "indicating the need to release the UE context.",
)

APPENDIX_RECORD = parse_log_file(json.dumps([{
    "flap": [
        "FIAP-PDU: initiatingMessage (0)",
        "procedureCode: id-UEContextReleaseRequest (10)",
        "UEContextReleaseRequest",
        "gNB-CU-UE-FIAP-ID: 0",
        "gNB-DU-UE-FIAP-ID: 0",
    ],
}]))[0]


class TestParseReply:
    def test_appendix_shape(self):
        label, confidence, explanation = parse_classifier_reply(APPENDIX_REPLY)
        assert label is Label.EXECUTED
        assert confidence == 100
        assert explanation.startswith("The log file contains")

    def test_compact_lowercase(self):
        label, confidence, explanation = parse_classifier_reply("label: no\nconfidence: 40%")
        assert label is Label.NOT_EXECUTED
        assert confidence == 40
        assert explanation == ""

    def test_answer_prefix(self):
        label, confidence, _ = parse_classifier_reply("Answer: Yes\nConfidence Score: 85%")
        assert label is Label.EXECUTED
        assert confidence == 85

    def test_no_label_is_parse_error(self):
        with pytest.raises(ReplyParseError):
            parse_classifier_reply("Sure! Here is my analysis of the log entry...")

    def test_missing_confidence_defaults_to_zero(self):
        label, confidence, _ = parse_classifier_reply("Label: yes")
        assert label is Label.EXECUTED
        assert confidence == 0

    def test_out_of_range_confidence_clamped(self):
        _, confidence, _ = parse_classifier_reply("Label: yes\nConfidence: 250%")
        assert confidence == 100

    def test_empty_reply(self):
        with pytest.raises(ReplyParseError):
            parse_classifier_reply("   \n ")


class TestDeterministicMatch:
    def test_appendix_positive_instance(self):
        result = deterministic_match(APPENDIX_STEP, APPENDIX_RECORD)
        assert result.label is Label.EXECUTED
        assert result.confidence == 100
        assert "UEContextReleaseRequest" in result.explanation

    def test_similar_but_different_message_name(self):
        step = FlowStep.from_description(
            1, "The AMF sends a PDU SESSION RESOURCE REQUEST to the gNB-CU."
        )
        record = parse_log_file(json.dumps([{
            "ngap": ["NGAP-PDU", "PDUSessionResourceSetupRequest"],
        }]))[0]
        result = deterministic_match(step, record)
        assert result.label is Label.NOT_EXECUTED

    def test_missing_protocol_entirely(self):
        step = FlowStep.from_description(
            1, "The AMF sends an INITIAL CONTEXT SETUP RESPONSE to the gNB-CU."
        )
        record = parse_log_file(json.dumps([{"rrc": ["RRC message", "MeasurementReport"]}]))[0]
        assert deterministic_match(step, record).label is Label.NOT_EXECUTED

    def test_separator_variants_match(self):
        step = FlowStep(ordinal=1, description="release step",
                        message_name="UE-CONTEXT-RELEASE-REQUEST")
        assert deterministic_match(step, APPENDIX_RECORD).label is Label.EXECUTED

    def test_strict_mode_requires_message(self):
        step = FlowStep(ordinal=1, description="the UE attaches")
        with pytest.raises(MatchRuleError):
            deterministic_match(step, APPENDIX_RECORD, MatchRules(strict=True))

    def test_non_strict_mode_returns_not_executed(self):
        step = FlowStep(ordinal=1, description="the UE attaches")
        result = deterministic_match(step, APPENDIX_RECORD, MatchRules(strict=False))
        assert result.label is Label.NOT_EXECUTED
        assert result.confidence == 0

    def test_endpoint_cooccurrence(self):
        step = FlowStep(
            ordinal=1, description="release", message_name="UE CONTEXT RELEASE REQUEST",
            endpoints=("gNB-DU", "gNB-CU"),
        )
        rules = MatchRules(check_endpoints=True)
        assert deterministic_match(step, APPENDIX_RECORD, rules).label is Label.EXECUTED
        step_wrong = FlowStep(
            ordinal=1, description="release", message_name="UE CONTEXT RELEASE REQUEST",
            endpoints=("AMF", "SMF"),
        )
        assert deterministic_match(step_wrong, APPENDIX_RECORD, rules).label is Label.NOT_EXECUTED

    @given(st.sampled_from(["-", "_", " ", ""]), st.booleans())
    def test_normalization_invariance(self, separator, lowercase):
        token = separator.join(["UE", "CONTEXT", "RELEASE", "REQUEST"])
        if lowercase:
            token = token.lower()
        step = FlowStep(ordinal=1, description="release step", message_name=token)
        result = deterministic_match(step, APPENDIX_RECORD)
        assert result.label is Label.EXECUTED

    def test_purity(self):
        first = deterministic_match(APPENDIX_STEP, APPENDIX_RECORD)
        second = deterministic_match(APPENDIX_STEP, APPENDIX_RECORD)
        assert first == second

    def test_normalize_token(self):
        assert normalize_token("UE-Context_Release Request!") == "UECONTEXTRELEASEREQUEST"


class TestLlmClassifier:
    def test_parses_appendix_reply(self):
        chat = ScriptedChatClient(replies=[APPENDIX_REPLY])
        clf = LlmClassifier(chat)
        result = clf.classify(APPENDIX_STEP, APPENDIX_RECORD)
        assert result.label is Label.EXECUTED
        assert result.confidence == 100
        assert result.backend.startswith("llm:")

    def test_prompt_contains_step_and_record(self):
        chat = ScriptedChatClient(replies=[APPENDIX_REPLY])
        LlmClassifier(chat).classify(APPENDIX_STEP, APPENDIX_RECORD)
        _, user = chat.calls[0]
        assert "UE CONTEXT RELEASE REQUEST" in user
        assert "UEContextReleaseRequest" in user

    def test_unparseable_reply_retried_with_reminder(self):
        chat = ScriptedChatClient(replies=["I think it did happen!", "Label: yes\nConfidence: 90%"])
        result = LlmClassifier(chat).classify(APPENDIX_STEP, APPENDIX_RECORD)
        assert result.label is Label.EXECUTED
        assert len(chat.calls) == 2
        assert "did not follow the required format" in chat.calls[1][1]

    def test_unparseable_twice_aborts_with_raw(self):
        chat = ScriptedChatClient(replies=["nonsense", "more nonsense"])
        with pytest.raises(ClassificationError) as exc:
            LlmClassifier(chat).classify(APPENDIX_STEP, APPENDIX_RECORD)
        assert exc.value.raw_reply == "more nonsense"

    def test_transport_failure_surfaces_after_retries(self):
        attempts = []

        def handler(request):
            attempts.append(1)
            return httpx.Response(500, json={"error": "down"})

        config = HttpBackendConfig(
            base_url="http://llm.test/v1", model="m",
            retry=RetryPolicy(attempts=2, backoff_seconds=0.0),
        )
        chat = HttpChatClient(config, transport=httpx.MockTransport(handler))
        with pytest.raises(ClassificationError):
            LlmClassifier(chat).classify(APPENDIX_STEP, APPENDIX_RECORD)
        assert len(attempts) == 2

    def test_http_chat_round_trip_with_auth(self, monkeypatch):
        monkeypatch.setenv("LLM_TOKEN", "sekrit")
        seen = {}

        def handler(request):
            seen["auth"] = request.headers.get("authorization")
            seen["body"] = json.loads(request.content)
            return httpx.Response(
                200, json={"choices": [{"message": {"content": APPENDIX_REPLY}}]}
            )

        config = HttpBackendConfig(base_url="http://llm.test/v1", model="checker",
                                   token_env="LLM_TOKEN")
        chat = HttpChatClient(config, transport=httpx.MockTransport(handler))
        result = LlmClassifier(chat).classify(APPENDIX_STEP, APPENDIX_RECORD)
        assert result.label is Label.EXECUTED
        assert seen["auth"] == "Bearer sekrit"
        assert seen["body"]["model"] == "checker"


class TestBackendInterchangeability:
    def test_same_labels_same_decision(self):
        scripted = ScriptedChatClient(replies=[APPENDIX_REPLY])
        llm_result = LlmClassifier(scripted).classify(APPENDIX_STEP, APPENDIX_RECORD)
        det_result = DeterministicClassifier().classify(APPENDIX_STEP, APPENDIX_RECORD)
        assert llm_result.label == det_result.label
