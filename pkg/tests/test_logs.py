"""Log ingestion: parsing, filtering, renumbering, round-trip, dissector."""

from __future__ import annotations

import json
import stat

import pytest
from hypothesis import given, strategies as st

from orantest.logs import (
    DissectorConfig,
    DissectorConfigError,
    DissectorError,
    EmptySequenceError,
    LogParseError,
    LogSchemaError,
    dissect_capture,
    parse_log_file,
    to_canonical_json,
)

APPENDIX_PACKET = {
    "user_dlt": [],
    "flap": [
        "FIAP-PDU: initiatingMessage (0)",
        "initiatingMessage",
        "procedureCode: id-UEContextReleaseRequest (10)",
        "criticality: ignore (1)",
        "value",
        "UEContextReleaseRequest",
        "protocolIEs: 3 items",
        "gNB-CU-UE-FIAP-ID: 0",
        "gNB-DU-UE-FIAP-ID: 0",
        "Cause: radioNetwork (0)",
    ],
}


class TestParseLogFile:
    def test_appendix_shape_single_packet(self):
        sequence = parse_log_file(json.dumps([APPENDIX_PACKET]))
        assert len(sequence) == 1
        record = sequence[0]
        assert record.index == 1
        # the dissector's quirky key is normalized
        assert "f1ap" in record.layers
        assert "UEContextReleaseRequest" in record.layers["f1ap"]

    def test_empty_array_is_empty_sequence_error(self):
        with pytest.raises(EmptySequenceError):
            parse_log_file(b"[]")

    def test_filter_drops_and_renumbers(self):
        packets = [
            {"ngap": ["InitialUEMessage"]},
            {"f1ap": ["F1SetupRequest"]},
            {"ngap": ["InitialContextSetupRequest"]},
        ]
        sequence = parse_log_file(json.dumps(packets), protocol_filter={"ngap"})
        assert len(sequence) == 2
        assert [r.index for r in sequence] == [1, 2]
        assert [r.source_frame for r in sequence] == [1, 3]
        assert all(set(r.layers) == {"ngap"} for r in sequence)

    def test_filter_trims_other_layers(self):
        packets = [{"ngap": ["InitialUEMessage"], "sctp": ["DATA chunk"]}]
        sequence = parse_log_file(json.dumps(packets), protocol_filter={"ngap"})
        assert set(sequence[0].layers) == {"ngap"}

    def test_all_packets_filtered_out(self):
        packets = [{"mac-nr": ["MAC PDU"]}]
        with pytest.raises(EmptySequenceError):
            parse_log_file(json.dumps(packets), protocol_filter={"ngap"})

    def test_malformed_json_reports_offset(self):
        with pytest.raises(LogParseError) as exc:
            parse_log_file(b'[{"ngap": ["x"]}, {"bad"')
        assert exc.value.offset is not None

    def test_non_string_array_names_protocol(self):
        with pytest.raises(LogSchemaError) as exc:
            parse_log_file(json.dumps([{"ngap": [1, 2]}]))
        assert exc.value.protocol == "ngap"

    def test_ndjson_input(self):
        lines = "\n".join(
            json.dumps({"ngap": [f"Message{i}"]}) for i in range(3)
        )
        sequence = parse_log_file(lines)
        assert len(sequence) == 3

    def test_ndjson_error_offset_points_into_line(self):
        content = json.dumps({"ngap": ["ok"]}) + "\n{broken\n"
        with pytest.raises(LogParseError) as exc:
            parse_log_file(content)
        assert exc.value.offset > len(json.dumps({"ngap": ["ok"]}))

    def test_canonical_shape_with_frame_and_timestamp(self):
        packets = [{"layers": {"ngap": ["InitialUEMessage"]}, "frame": 17, "timestamp": 12345}]
        sequence = parse_log_file(json.dumps(packets))
        assert sequence[0].source_frame == 17
        assert sequence[0].timestamp_us == 12345

    def test_trailing_whitespace_stripped_only(self):
        packets = [{"ngap": ["  leading kept   "]}]
        sequence = parse_log_file(json.dumps(packets))
        assert sequence[0].layers["ngap"] == ("  leading kept",)

    def test_determinism(self):
        content = json.dumps([APPENDIX_PACKET, {"ngap": ["InitialUEMessage"]}])
        assert parse_log_file(content) == parse_log_file(content)


class TestRoundTrip:
    def test_fixture_logs_round_trip(self, fixtures_dir):
        for log_file in sorted((fixtures_dir / "logs").glob("*.json")):
            sequence = parse_log_file(log_file.read_bytes(), origin=str(log_file))
            reparsed = parse_log_file(
                to_canonical_json(sequence),
                protocol_filter=sequence.protocol_filter,
                origin=sequence.origin,
            )
            assert reparsed == sequence

    @given(
        st.lists(
            st.dictionaries(
                st.sampled_from(["ngap", "f1ap", "e1ap", "mac-nr"]),
                st.lists(st.text(min_size=1, max_size=12).map(str.rstrip), max_size=3),
                min_size=1,
                max_size=3,
            ),
            min_size=1,
            max_size=8,
        )
    )
    def test_round_trip_random(self, packets):
        sequence = parse_log_file(json.dumps(packets))
        assert parse_log_file(to_canonical_json(sequence)) == sequence

    @given(st.permutations(list(range(6))))
    def test_relative_order_preserved(self, frames):
        packets = [{"ngap": [f"msg-{k}"]} for k in frames]
        sequence = parse_log_file(json.dumps(packets))
        observed = [r.layers["ngap"][0] for r in sequence]
        assert observed == [f"msg-{k}" for k in frames]


class TestDissectCapture:
    def _fake_dissector(self, tmp_path, payload: str, exit_code: int = 0) -> str:
        script = tmp_path / "fake_dissector.sh"
        script.write_text(
            "#!/bin/sh\n"
            + (f"cat <<'EOF'\n{payload}\nEOF\n" if payload else "")
            + (f"echo 'decode failure' >&2\nexit {exit_code}\n" if exit_code else "exit 0\n")
        )
        script.chmod(script.stat().st_mode | stat.S_IEXEC)
        return str(script)

    def test_happy_path(self, tmp_path):
        capture = tmp_path / "trace.pcap"
        capture.write_bytes(b"\xd4\xc3\xb2\xa1fake")
        payload = json.dumps([{"ngap": ["InitialUEMessage"]}])
        config = DissectorConfig(executable=self._fake_dissector(tmp_path, payload))
        sequence = dissect_capture(capture, config)
        assert len(sequence) == 1

    def test_tshark_shape_is_flattened(self, tmp_path):
        capture = tmp_path / "trace.pcap"
        capture.write_bytes(b"\xd4\xc3\xb2\xa1fake")
        payload = json.dumps(
            [{"_source": {"layers": {"ngap": {"procedureCode": "21", "pdu": ["a", "b"]}}}}]
        )
        config = DissectorConfig(executable=self._fake_dissector(tmp_path, payload))
        sequence = dissect_capture(capture, config)
        assert "procedureCode: 21" in sequence[0].layers["ngap"]

    def test_nonzero_exit_carries_stderr(self, tmp_path):
        capture = tmp_path / "trace.pcap"
        capture.write_bytes(b"\xd4\xc3\xb2\xa1fake")
        config = DissectorConfig(executable=self._fake_dissector(tmp_path, "", exit_code=2))
        with pytest.raises(DissectorError) as exc:
            dissect_capture(capture, config)
        assert "decode failure" in exc.value.stderr

    def test_missing_executable(self, tmp_path):
        capture = tmp_path / "trace.pcap"
        capture.write_bytes(b"\xd4\xc3\xb2\xa1fake")
        config = DissectorConfig(executable=str(tmp_path / "nope"))
        with pytest.raises(DissectorConfigError):
            dissect_capture(capture, config)

    def test_missing_capture(self, tmp_path):
        config = DissectorConfig(executable="/bin/true")
        with pytest.raises(DissectorConfigError):
            dissect_capture(tmp_path / "absent.pcap", config)

    def test_user_plane_only_capture_yields_empty_error(self, tmp_path):
        capture = tmp_path / "trace.pcap"
        capture.write_bytes(b"\xd4\xc3\xb2\xa1fake")
        payload = json.dumps([{"gtp-u": ["T-PDU"]}, {"gtp-u": ["T-PDU"]}])
        config = DissectorConfig(executable=self._fake_dissector(tmp_path, payload))
        with pytest.raises(EmptySequenceError):
            dissect_capture(capture, config, protocol_filter={"ngap", "f1ap", "e1ap"})
